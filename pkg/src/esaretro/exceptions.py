"""Exception types raised across the package."""


class EsaError(Exception):
    """Base class for all package errors."""


class MalformedRecord(EsaError, ValueError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        msg = f"malformed record at line {line_no}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class DuplicateTitle(EsaError, ValueError):
    def __init__(self, title):
        self.title = title
        super().__init__(f"duplicate title: {title!r}")


class ProviderFailure(EsaError, RuntimeError):
    def __init__(self, word, reason=""):
        self.word = word
        msg = f"provider failed for word {word!r}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class EmptyCorpus(EsaError, ValueError):
    def __init__(self, msg="corpus contains no documents"):
        super().__init__(msg)


class UnknownConcept(EsaError, KeyError):
    def __init__(self, title):
        self.title = title
        super().__init__(title)

    def __str__(self):
        return f"unknown concept: {self.title!r}"


class AsymmetricEdge(EsaError, ValueError):
    def __init__(self, u, v):
        self.u, self.v = u, v
        super().__init__(f"edge {u!r} -> {v!r} has no reverse entry")


class SelfLoop(EsaError, ValueError):
    def __init__(self, u):
        self.u = u
        super().__init__(f"self-loop on {u!r}")


class DimensionMismatch(EsaError, ValueError):
    pass


class InvalidConfig(EsaError, ValueError):
    pass


class LengthMismatch(EsaError, ValueError):
    pass


class DegenerateInput(EsaError, ValueError):
    pass


class TooFewPairs(EsaError, ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"only {report.items_scored} of {report.items_total} pairs could be scored"
        )


class MalformedLine(EsaError, ValueError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        msg = f"malformed line {line_no}"
        super().__init__(f"{msg}: {reason}" if reason else msg)
