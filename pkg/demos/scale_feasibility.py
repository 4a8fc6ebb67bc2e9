"""Show where the k = 2 moment system stops having admissible solutions.

For p = 4 the per-scale system collapses to a quadratic, so feasibility
is readable off the discriminant and root locations.  With the default
nu_j = (3/4) delta / j^2, the product the quadratic must hit turns
negative once j is large enough, and both masses can no longer sit in
(0, 1).  The builder records those scales in failed_js instead of
pretending.
"""

from fractions import Fraction

from lp_isoforge.analysis import uncomplemented_certificate
from lp_isoforge.errors import NoSolutionError
from lp_isoforge.momentpoly import cm_alpha_table
from lp_isoforge.solver import (
    closed_form_k2,
    construct_pair,
    default_base_point,
    target_h,
)


def main() -> None:
    table = cm_alpha_table(2)
    base = default_base_point(2)
    target = target_h(base, table)
    print(f"base point {base.values}, target H values {target.values}")
    print()

    delta = Fraction(1, 48)
    print("closed-form roots per scale, nu_j = (3/4) delta / j^2:")
    for j in range(1, 13):
        nu = Fraction(3, 4) * delta / (j * j)
        # the quadratic x^2 - s x + q the roots must satisfy
        s = target.values[0] - nu * j * j
        q = (target.values[1] - s - nu * (6 * j * j * s + j**4)) / 6
        try:
            mu = closed_form_k2(j, nu, target)
            roots = ", ".join(f"{float(m):.6f}" for m in mu.values)
            print(f"  j = {j:2d}  q = {float(q):+.6f}  roots {roots}")
        except NoSolutionError as exc:
            print(f"  j = {j:2d}  q = {float(q):+.6f}  no solution ({exc})")
    print()

    cert = construct_pair(4, 12)
    print(f"construct_pair(4, 12): solved {len(cert.entries)} scales")
    print(f"  failed_js = {cert.failed_js}")
    print(f"  complete  = {cert.complete}")
    print()
    print("the partial certificate still verifies on the scales it covers;")
    print("extending p = 4 past this window means leaving the delta / j^2")
    print("mass schedule, which the builder does not automate:")
    print()
    print(uncomplemented_certificate(cert).divergence_note)


if __name__ == "__main__":
    main()
