from models.alpha import AlphaSolution, BlockWordSpec, BoundCertificate
from models.partition import (Factor, FactorPartition, PartitionTrace, RefinementWitness,
                              RegularityParams, RegularityVerdict, TraceRound)
from models.shard import ShardResult, ShardTask
from models.table import ExactResult, TableEntry
from models.tuplet import TupletResult, Verification
from models.word import Alphabet, DensityVector, Support, Word
