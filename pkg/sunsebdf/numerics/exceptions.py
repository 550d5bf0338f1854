class InvalidArgument(Exception):
    def __init__(self, *args):
        self.args = args


class UnsupportedOrder(Exception):
    def __init__(self, *args):
        self.args = args
        self.order: int = 0


class MeshMismatch(Exception):
    def __init__(self, *args):
        self.args = args


class CapUnsatisfiable(Exception):
    def __init__(self, *args):
        self.args = args
        self.retries: int = 0
        """How many full redraws were attempted."""


class BracketFailure(Exception):
    def __init__(self, *args):
        self.args = args


class StarterFailure(Exception):
    def __init__(self, *args):
        self.args = args
        self.step: int = -1


class StepFailure(Exception):
    def __init__(self, *args):
        self.args = args
        self.step: int = -1
        self.iterations: int = 0


class SolverFailure(Exception):
    def __init__(self, *args):
        self.args = args
        self.step: int = -1


class RatioWarning(Warning):
    def __init__(self, *args):
        self.args = args
