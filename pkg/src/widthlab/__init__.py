"""widthlab: measured performance bounds for parametric transport models.

The package builds adversarial transport problems on a sheared reference
domain, certifies metric-entropy lower bounds from quantity-of-interest
separations, probes the matching smoothness upper bounds, and contrasts
both with a reduced-basis baseline for an affine elliptic problem.
"""

from .bumps import ProblemFamily, build_family, param_grid, sobolev_norm
from .errors import (CertificateError, ConfigError, DomainError,
                     QuadratureError, TraceError, WidthlabError)
from .mollifier import Mollifier
from .refdomain import (FlowField, ReferenceMap, SwitchFunction, backward_map,
                        centered_grid, forward_map, make_switch, shear_point,
                        trace_characteristic, velocity)
from .transport import (QoICurve, TransportProblem, convolution_reference,
                        family_problem, qoi, qoi_curve, qoi_with_source,
                        riemann_recovery, sup_distance)
from .widths import (PackingCertificate, RateFit, certificate_count,
                     certificate_disjoint, cover_decoder, greedy_cover,
                     greedy_packing, rate_fit, smoothness_probe,
                     variable_b_family, verify_certificate)

__all__ = [
    "CertificateError", "ConfigError", "DomainError", "FlowField",
    "Mollifier", "PackingCertificate", "ProblemFamily", "QoICurve",
    "QuadratureError", "RateFit", "ReferenceMap", "SwitchFunction",
    "TraceError", "TransportProblem", "WidthlabError", "backward_map",
    "build_family", "centered_grid", "certificate_count",
    "certificate_disjoint", "convolution_reference", "cover_decoder",
    "family_problem", "forward_map", "greedy_cover", "greedy_packing",
    "make_switch", "param_grid", "qoi", "qoi_curve", "qoi_with_source",
    "rate_fit", "riemann_recovery", "shear_point", "smoothness_probe",
    "sobolev_norm", "sup_distance", "trace_characteristic",
    "variable_b_family", "velocity", "verify_certificate",
]

__version__ = "0.1.0"
