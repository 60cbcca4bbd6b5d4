"""Band degeneracies of Hermitian matrix families and their topology."""
__version__ = "0.1.0"

from .errors import (AmbiguousMultiplicity, BandtopError, ConvergenceError, DegeneracyError,
                     GenericityError, InconsistencyError, ModelError, NoValidSlicing, NumericalError)
from .models import (HamiltonianFamily, BlochTermModel, Term, SymmetryDeclaration, load_model,
                     loads_model, dumps_model, make_gyroid, make_honeycomb, make_diamond, make_petal,
                     make_digraph, make_spin_family, spin_matrices, resolve_model, deform, negate, restrict)
from .topology import (chern_on_slice, chern_on_sphere, slice_chern_numbers, sphere_chern_numbers,
                       berry_phase, circle_loop, polygon_loop)
from .degeneracy import find_degeneracies, DegeneratePoint, DegeneracyScan
from .localmodel import classify_point, local_charges, LocalModel
from .analysis import (slice_profile, check_global, track_deformation, track_default_deformation,
                       SliceProfile, ConstraintReport)
from .report import analyze, audit
