"""Exception types shared across the package."""


class EgmkitError(Exception):
    """Base class for all egmkit errors."""


# --- query parsing / rendering ---

class EmptyQueryError(EgmkitError):
    pass


class QuerySyntaxError(EgmkitError):
    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {offset}{hint}")


class UnsupportedConstructError(EgmkitError):
    pass


# --- provider fetching ---

class ProviderError(EgmkitError):
    pass


class AuthError(ProviderError):
    pass


class RateLimitedError(ProviderError):
    pass


class MalformedPayloadError(ProviderError):
    pass


class NetworkError(ProviderError):
    pass


class AllProvidersFailedError(EgmkitError):
    pass


# --- import ---

class SchemaError(EgmkitError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


# --- text preparation ---

class EmptyVocabularyError(EgmkitError):
    pass


class NoKeywordsForTopicError(EgmkitError):
    pass


# --- topic model ---

class EmptyCorpusError(EgmkitError):
    pass


class InvariantViolation(EgmkitError):
    """A model-state bookkeeping invariant failed an audit."""


# --- evidence gap map domain ---

class UnknownTopicError(EgmkitError):
    pass


class UnknownDocError(EgmkitError):
    pass


class DocNotIncludedError(EgmkitError):
    pass


class UnknownAxisIdError(EgmkitError):
    pass


class NoFrameworkError(EgmkitError):
    pass


# --- persistence / service ---

class SchemaVersionMismatchError(EgmkitError):
    pass


class IntegrityError(EgmkitError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConflictError(EgmkitError):
    pass


class UnknownKindError(EgmkitError):
    pass
