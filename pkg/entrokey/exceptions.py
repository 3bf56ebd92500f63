"""
Error hierarchy. Every error knows the process exit code the CLI reports for it.
"""


class EntrokeyError(Exception):
    exit_code = 4


class ConfigError(EntrokeyError):
    exit_code = 2


class DataError(EntrokeyError):
    exit_code = 3


class StageError(EntrokeyError):
    """A pipeline stage failed; the message is tagged with the stage name."""
    exit_code = 4

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f'[{stage}] {cause}')


class CorpusReadError(DataError):
    pass


class CorpusFormatError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class DuplicateDocumentError(DataError):
    def __init__(self, doc_id, line=None):
        self.doc_id = doc_id
        message = f'duplicate document id "{doc_id}"'
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class UntokenizedDocumentError(DataError):
    def __init__(self, doc_id):
        self.doc_id = doc_id
        super().__init__(f'document "{doc_id}" has not been segmented')


class SegmentationError(DataError):
    pass


class SegmenterConfigError(ConfigError):
    pass


class DictionaryError(ConfigError):
    pass


class EntropyInputError(DataError):
    pass


class KeywordError(DataError):
    pass


class InvalidGridError(ConfigError):
    pass


class DimensionMismatchError(DataError):
    pass


class TrainingError(DataError):
    pass


class ModelFileError(DataError):
    pass


class FoldError(DataError):
    pass


class MetricsError(DataError):
    pass


class OutputLockedError(ConfigError):
    pass


def flatten_validation_detail(detail, prefix=''):
    """Flatten a DRF ValidationError.detail into 'field: message' strings."""
    if isinstance(detail, dict):
        messages = []
        for key, value in detail.items():
            if key == 'non_field_errors':
                name = prefix
            else:
                name = f'{prefix}.{key}' if prefix else str(key)
            messages.extend(flatten_validation_detail(value, name))
        return messages
    if isinstance(detail, (list, tuple)):
        messages = []
        for index, value in enumerate(detail):
            if isinstance(value, (dict, list, tuple)):
                messages.extend(flatten_validation_detail(value, f'{prefix}[{index}]'))
            else:
                messages.extend(flatten_validation_detail(value, prefix))
        return messages
    return [f'{prefix}: {detail}' if prefix else str(detail)]
