from .lora import LoRALinear
from .encoder import ToyEncoder
from .attention import ObjectGuidedAttention
from .projector import MultiModalProjector
from .estimator import NumericalEstimator
from .vocab import Vocab, A_START, EOS, NUM, PAD, UNK
from .net import EarthVLNet

__all__ = [
    "LoRALinear",
    "ToyEncoder",
    "ObjectGuidedAttention",
    "MultiModalProjector",
    "NumericalEstimator",
    "Vocab",
    "EarthVLNet",
    "A_START",
    "EOS",
    "NUM",
    "PAD",
    "UNK",
]
