"""Generator for the bundled reference table data/hyperbolic_y_cdf.json.

The table holds the CDF of the y-coordinate of a point drawn from the
normalized hyperbolic area measure (3/pi) dx dy / y^2 on the standard
fundamental domain {|x| <= 1/2, x^2 + y^2 >= 1} of the upper half
plane.  The y-marginal density is

    (3/pi) (1 - 2 sqrt(1 - y^2)) / y^2   for sqrt(3)/2 <= y <= 1,
    (3/pi) / y^2                         for y >= 1,

integrated here by composite Simpson quadrature.  The first piece is
parametrized by y = sin(theta) so the integrand stays smooth at y = 1;
this also packs the knots densely where the density changes fastest.
Mass above the last knot is summarized by tail_coeff = t * (1 - F(t)),
so a consumer can extend the table with F(y) = 1 - tail_coeff / y.

Run `python -m latshape.gen_reference` to regenerate the file.
"""

import json
import math
import pathlib

Y0 = math.sqrt(3.0) / 2.0
OUT_NAME = "hyperbolic_y_cdf.json"


def density(y: float) -> float:
    if y <= Y0:
        return 0.0
    if y <= 1.0:
        return (3.0 / math.pi) * (1.0 - 2.0 * math.sqrt(max(0.0, 1.0 - y * y))) / (y * y)
    return (3.0 / math.pi) / (y * y)


def _simpson(f, a: float, b: float) -> float:
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))


def build_table(theta_panels: int = 1536, mid_step: float = 1.0 / 256, y_top: float = 12.0):
    knots = [Y0]
    cdf = [0.0]
    acc = 0.0

    def g(theta):
        # density along y = sin(theta), times dy/dtheta
        return density(math.sin(theta)) * math.cos(theta)

    t0, t1 = math.pi / 3.0, math.pi / 2.0
    for i in range(1, theta_panels + 1):
        a = t0 + (t1 - t0) * (i - 1) / theta_panels
        b = t0 + (t1 - t0) * i / theta_panels
        acc += _simpson(g, a, b)
        knots.append(math.sin(b))
        cdf.append(acc)

    steps = round((y_top - 1.0) / mid_step)
    for i in range(1, steps + 1):
        a = 1.0 + mid_step * (i - 1)
        b = 1.0 + mid_step * i
        acc += _simpson(density, a, b)
        knots.append(b)
        cdf.append(acc)

    return {
        "law": "hyperbolic fundamental domain y-marginal",
        "knots": knots,
        "cdf": cdf,
        "tail_coeff": knots[-1] * (1.0 - cdf[-1]),
    }


def main() -> None:
    table = build_table()
    out = pathlib.Path(__file__).parent / "data" / OUT_NAME
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(table) + "\n")
    print("wrote %s (%d knots, tail_coeff=%.12f)" % (out, len(table["knots"]), table["tail_coeff"]))


if __name__ == "__main__":
    main()
