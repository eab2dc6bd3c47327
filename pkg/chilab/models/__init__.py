from chilab.models.graph import Graph, VertexSet
from chilab.models.triangle import Triangle, TriangleMatching
from chilab.models.matching import Bipartition, Equipartition, HallWitness, WitnessClass
from chilab.models.chromatic import ChiMethod, ChiResult
from chilab.models.martingale import ExposurePrefix, LastStep, PrefixClass
from chilab.models.family import QFamily, TabulatedQ
