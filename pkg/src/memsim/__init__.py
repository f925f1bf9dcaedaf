"""Event-driven behavioral simulator of hybrid memristor-CMOS neuromorphic hardware."""

from .crossbar import CrossbarConfig, HybridSynapseBank
from .device import MemristorParams, MemristorState
from .dpi import DpiParams, DpiState
from .mesh import AddressEvent, BoardSpec, MeshStats
from .neuron import IfNeuronParams, SpikeWaveform
from .stdp import StdpProbe

__version__ = "0.1.0"
