"""Continual-learning benchmark over frozen pre-trained embeddings.

Subpackages:
- embedstore: CLEB-v1 binary stores and a synthetic generator
- scenario:   task-stream generators (unrealistic / semireal / real)
- memory:     class-balanced rehearsal buffer with optional herding
- dynnan:     dynamically expanding dense classification head
- optim:      SGD with warm-restart cosine schedule
- metrics:    accuracy matrix, forgetting metrics, multi-seed aggregation
- runner:     experiment orchestration, validation, reports
"""

from .embedstore import (
    EmbeddingStore,
    SynthSpec,
    generate_synthetic,
    load_store,
    read_store,
    save_store,
    write_store,
)
from .memory import MemoryBuffer, MemoryPolicy, as_training_set, herding_select, update
from .metrics import AccuracyMatrix, RunMetrics, aggregate_runs, compute_metrics
from .optim import OptimConfig, Strategy, lr_at, train_task
from .runner import RunConfig, run_experiment, validate_stream
from .scenario import (
    StreamKind,
    TaskSpec,
    TaskStream,
    gen_realcl,
    gen_semireal,
    gen_unrealistic,
    seen_classes,
)

__version__ = "0.1.0"
