class BundleConnError(Exception):
    """
    Base exception class of the package.
    When generated, it requires a string with a description of the error.
    """
    def __init__(self, text):
        self.text = text

    def __str__(self):
        return self.text


class JetError(BundleConnError):
    """
    Exception class for malformed jet arithmetic: variable-count or arity mismatch,
    nonzero constant term of an inner jet, singular linear part.
    """
    pass


class OrderExhaustedError(BundleConnError):
    """
    Exception class raised when an operation needs more derivatives
    than the truncation order of its input provides.
    """
    pass


class SignatureError(BundleConnError):
    """
    Exception class for tensor slot mismatches: wrong space, wrong variance,
    wrong slot kind or an unexpected signature.
    """
    pass


class SceneError(BundleConnError):
    """
    Exception class for invalid input data: malformed scene files,
    inconsistent dimensions, missing parameters.
    """
    pass
