from enum import Enum


class ExitCode(Enum):
    OK = 0
    USAGE = 2
    INTERVAL = 3
    PRECONDITION = 4


class Construction(Enum):
    GREEDY = "greedy"
    CLAIM1 = "claim1"
    THM2 = "thm2"
    PIPELINE = "pipeline"
    EXACT = "exact"


class OutputFormat(Enum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"


class ExactMode(Enum):
    EXACT = "exact"
    LOWER_AND_UPPER = "lower-and-upper"


class EpsilonSchedule(Enum):
    # (log n / log log n)^(-1/4)
    STANDARD = "standard"
    # ((log log n)^2 / log n)^(1/3)
    IMPROVED = "improved"
