"""
Tensor denso con diferenciación automática en modo reverso

- Datos float64, contiguos, orden fila (N, C, H, W para imágenes)
- Cada operación diferenciable añade un nodo a un ComputeGraph
- Los nodos se guardan en orden de creación: el orden de inserción ya es
  un orden topológico, backward lo recorre al revés una sola vez
"""
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContractViolation, DimensionError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Array n-dimensional con gradiente opcional"""

    __slots__ = ("_data", "requires_grad", "grad", "_graph", "_node_id", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        # Los escalares se quedan en forma ()
        array = np.array(data, dtype=np.float64, order="C")
        if any(d <= 0 for d in array.shape):
            raise DimensionError(f"Dimensiones no positivas: {array.shape}")
        self._data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._graph: Optional["ComputeGraph"] = None
        self._node_id: Optional[int] = None
        self.name = name

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> Tuple[int, ...]:
        return self._data.shape

    @property
    def size(self) -> int:
        return int(self._data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node_id is None

    def numpy(self) -> np.ndarray:
        return self._data.copy()

    def item(self) -> float:
        if self.size != 1:
            raise ContractViolation(f"item() sobre tensor de forma {self.shape}")
        return float(self._data.reshape(-1)[0])

    def assign_(self, values: np.ndarray) -> None:
        """Sobrescribe los datos in-place (solo parámetros hoja)"""
        if not self.is_leaf:
            raise ContractViolation("assign_ solo está permitido en tensores hoja")
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.shape:
            raise DimensionError(f"assign_: forma {values.shape} != {self.shape}")
        self._data[...] = values

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # Azúcar aritmético, delega en ops
    def __add__(self, other):
        from . import ops
        return ops.add_scalar(self, other) if np.isscalar(other) else ops.add(self, other)

    def __sub__(self, other):
        from . import ops
        return ops.add_scalar(self, -other) if np.isscalar(other) else ops.sub(self, other)

    def __mul__(self, other):
        from . import ops
        return ops.scale(self, other) if np.isscalar(other) else ops.mul(self, other)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        from . import ops
        return ops.scale(self, -1.0)


@dataclass
class Node:
    """Nodo del grafo: operación, entradas y función backward con los valores guardados"""
    op: str
    inputs: Tuple[Tensor, ...]
    backward_fn: BackwardFn


@dataclass
class ComputeGraph:
    """
    Lista append-only de nodos

    Se usa como context manager; dentro del bloque todas las operaciones se
    registran en este grafo. Un grafo es de un solo hilo.
    """
    nodes: List[Node] = field(default_factory=list)

    def append(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def __len__(self) -> int:
        return len(self.nodes)

    def clear(self) -> None:
        self.nodes.clear()

    def __enter__(self) -> "ComputeGraph":
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        _stack().pop()


_local = threading.local()


def _stack() -> List[ComputeGraph]:
    if not hasattr(_local, "graphs"):
        _local.graphs = []
        _local.default = ComputeGraph()
        _local.grad_enabled = True
    return _local.graphs


def current_graph() -> ComputeGraph:
    stack = _stack()
    return stack[-1] if stack else _local.default


def reset_default_graph() -> None:
    _stack()
    _local.default = ComputeGraph()


def is_grad_enabled() -> bool:
    _stack()
    return _local.grad_enabled


@contextmanager
def no_grad():
    """Desactiva el registro de nodos (inferencia)"""
    _stack()
    previous = _local.grad_enabled
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


def record(op: str, data: np.ndarray, inputs: Iterable[Tensor], backward_fn: BackwardFn) -> Tensor:
    """Crea la salida de una operación y, si procede, su nodo en el grafo activo"""
    inputs = tuple(inputs)
    out = Tensor(data)
    if not is_grad_enabled() or not any(t.requires_grad for t in inputs):
        return out

    graph = current_graph()
    for t in inputs:
        if t._node_id is not None and t._graph is not graph:
            raise ContractViolation(f"{op}: entrada perteneciente a otro ComputeGraph")
    out.requires_grad = True
    out._graph = graph
    out._node_id = graph.append(Node(op=op, inputs=inputs, backward_fn=backward_fn))
    return out


def _propagate(loss: Tensor) -> Dict[int, Tuple[Tensor, np.ndarray]]:
    if loss.size != 1:
        raise ContractViolation(f"backward requiere una pérdida escalar, forma {loss.shape}")

    leaves: Dict[int, Tuple[Tensor, np.ndarray]] = {}
    if loss.is_leaf:
        if not loss.requires_grad:
            raise ContractViolation("La pérdida no forma parte de ningún ComputeGraph")
        leaves[id(loss)] = (loss, np.ones_like(loss.data))
        return leaves

    graph = loss._graph
    pending: Dict[int, np.ndarray] = {loss._node_id: np.ones_like(loss.data)}

    for node_id in range(loss._node_id, -1, -1):
        grad_out = pending.pop(node_id, None)
        if grad_out is None:
            continue
        node = graph.nodes[node_id]
        for tensor, grad_in in zip(node.inputs, node.backward_fn(grad_out)):
            if grad_in is None or not tensor.requires_grad:
                continue
            if tensor.is_leaf:
                key = id(tensor)
                if key in leaves:
                    leaves[key] = (tensor, leaves[key][1] + grad_in)
                else:
                    leaves[key] = (tensor, grad_in)
            elif tensor._node_id in pending:
                pending[tensor._node_id] = pending[tensor._node_id] + grad_in
            else:
                pending[tensor._node_id] = grad_in
    return leaves


def backward(loss: Tensor) -> None:
    """Acumula ∂loss/∂hoja en el buffer grad de cada hoja con requires_grad"""
    for tensor, grad in _propagate(loss).values():
        tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad


def grad_of(loss: Tensor, leaves: Sequence[Tensor]) -> List[np.ndarray]:
    """Gradientes respecto a `leaves` sin tocar sus buffers (modo data-parallel)"""
    found = _propagate(loss)
    return [found[id(t)][1] if id(t) in found else np.zeros_like(t.data) for t in leaves]


def as_array(value) -> np.ndarray:
    return value.data if isinstance(value, Tensor) else np.asarray(value, dtype=np.float64)
