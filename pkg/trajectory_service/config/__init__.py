from .settings import settings, Settings, presets_dir

__all__ = ["settings", "Settings", "presets_dir"]
