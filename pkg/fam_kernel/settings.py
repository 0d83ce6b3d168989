from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Optional

from django.conf import settings


def get_setting(setting_name: str, default_value: Any) -> Any:
    return getattr(settings, setting_name, default_value)


# Maximum number of generators in an orbit closure before the
# invariant solver gives up with ClosureDiverged.
# Default = 64
CLOSURE_CAP: int = get_setting("FAM_KERNEL_CLOSURE_CAP", 64)

# Number of full iterate measures kept in a NormTrace (norms are
# always kept for every row).
# Default = 8
TRACE_RETENTION: int = get_setting("FAM_KERNEL_TRACE_RETENTION", 8)

# Decimal places used when rendering rationals next to "p/q".
# Default = 12
DECIMAL_PLACES: int = get_setting("FAM_KERNEL_DECIMAL_PLACES", 12)

# Number of random points drawn for extensional cross-checks.
# Default = 16
SAMPLE_SIZE: int = get_setting("FAM_KERNEL_SAMPLE_SIZE", 16)

# Golden scenario directory; the FAM_KERNEL_CORPUS_DIR environment
# variable takes precedence over the Django setting.
# Default = the corpus bundled with the app
CORPUS_DIR: Path = Path(
    os.environ.get("FAM_KERNEL_CORPUS_DIR")
    or get_setting("FAM_KERNEL_CORPUS_DIR", Path(__file__).parent / "corpus")
)

# If True then instead of logging exceptions raised inside checks and
# suite instances, raise them, which will abort the run.
# Default = False
ABORT_ON_ERROR: bool = get_setting("FAM_KERNEL_ABORT_ON_ERROR", False)

# Directory that receives failing suite instances as scenario files.
# Default = None (failures are only kept in the report)
FAILURE_DUMP_DIR: Optional[str] = get_setting("FAM_KERNEL_FAILURE_DUMP_DIR", None)
