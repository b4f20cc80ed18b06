class ExportError(Exception):
    """Base class for everything this package raises on purpose."""


class DataError(ExportError):
    """Dataset or logits content violates the file contract."""


class ModelLoadError(ExportError):
    """Encoder weights, config, or tokenizer could not be loaded."""
