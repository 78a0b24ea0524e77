"""Scripted scenarios that rebuild the published constructions and check their outcome."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .decay import DiagonalChannelGeometry, barbell_channel, diagonal_channel, measure_decay
from .folds import DismantleCertificate, dismantle, replay
from .gibbs import q_of_pi, uniform
from .graphs import box_z2, build_constraint_graph, counterexample_abcd, complete, h_q
from .homspace import check_SSF, extend, validate_tssm_counterexample
from .spectral import channel_chain, eigen_decay, ssm_rate_cap
from .umc import maximal_configuration

CATALOGUE = ("figure-9", "figure-12", "prop-9.1", "prop-9.4")


@dataclass
class ScenarioReport:
    example: str
    passed: bool
    checks: dict
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> dict:
        return {"example": self.example, "verdict": "PASS" if self.passed else "FAIL",
                "checks": self.checks, "details": self.details}


def looped_tree_with_barbell():
    """0(loop) - 1 - 2(loop) - 3: a looped tree whose loops are not connected."""
    return build_constraint_graph(["0", "1", "2", "3"],
                                  [("0", "0"), ("2", "2"), ("0", "1"), ("1", "2"), ("2", "3")])


def figure_9(separations=range(2, 13, 2)) -> ScenarioReport:
    H = looped_tree_with_barbell()
    rows, ok = {}, True
    for d in separations:
        c = barbell_channel(d)
        b, sigma = c["board"], c["sigma"]
        left = extend(b, H, {**sigma, **c["alpha"]}) is not None
        right = extend(b, H, {**sigma, **c["beta"]}) is not None
        joint = extend(b, H, {**sigma, **c["alpha"], **c["beta"]}) is not None
        rows[d] = {"alpha_sigma": left, "sigma_beta": right, "alpha_sigma_beta": joint}
        ok &= left and right and not joint
    return ScenarioReport("figure-9", ok, {"empty_joint_nonempty_parts": ok}, {"separations": rows})


def figure_12(lengths=range(6, 15)) -> ScenarioReport:
    H = counterexample_abcd()
    cert = dismantle(H)
    dism = isinstance(cert, DismantleCertificate) and replay(H, cert)
    rows, cyl_ok = {}, True
    for n in lengths:
        c = diagonal_channel(n)
        alpha, beta = {c["x_l"]: "b"}, {c["x_r"]: "c"}
        empty = validate_tssm_counterexample(c["board"], H, alpha, c["sigma"], beta)
        rows[n] = empty
        cyl_ok &= empty
    rep = measure_decay(uniform(H), DiagonalChannelGeometry(H), list(lengths))
    tv_ok = all(t == 1.0 for t in rep.tv_values)
    checks = {"dismantlable_certificate_replays": dism, "joint_cylinder_empty": cyl_ok,
              "ssm_tv_equals_one": tv_ok}
    details = {"certificate": cert, "cylinders": rows, "decay": rep}
    return ScenarioReport("figure-12", all(checks.values()), checks, details)


def prop_9_1(boxes=((3, 3), (4, 4))) -> ScenarioReport:
    H = complete(5)
    order = tuple(H.vertices)
    res = maximal_configuration(box_z2(2, 1), H, order)
    m1_fails = not res.stable and res.incomparable_pair is not None
    ssf = {f"{w}x{h}": check_SSF(box_z2(w, h), H).holds for w, h in boxes}
    checks = {"m1_failure_certificate": m1_fails, "ssf_on_boxes": all(ssf.values())}
    return ScenarioReport("prop-9.1", all(checks.values()), checks,
                          {"incomparable_pair": res.incomparable_pair, "ssf": ssf})


def prop_9_4(q: int = 5) -> ScenarioReport:
    H = h_q(q)
    spec = eigen_decay(channel_chain(H, ("0", "b")))
    board = box_z2(3, 3)
    Q = q_of_pi(board, uniform(H), board.at(1, 1))
    checks = {
        "lambda_star": abs(spec.lambda_star - 1 / (q - 1)) <= 1e-9,
        "rate_cap": abs(spec.rate_cap - ssm_rate_cap(q)) <= 1e-9,
        "q_of_pi_bound": Q.value <= 6 / (q - 1) + 1e-12,
    }
    if q >= 12:
        checks["q_of_pi_below_p_c"] = Q.below_p_c
    return ScenarioReport("prop-9.4", all(checks.values()), checks,
                          {"q": q, "spectral": spec, "q_of_pi": Q,
                           "log_q_minus_1": math.log(q - 1)})


def run(example: str, **kwargs) -> ScenarioReport:
    table = {"figure-9": figure_9, "figure-12": figure_12, "prop-9.1": prop_9_1, "prop-9.4": prop_9_4}
    if example not in table:
        raise ValueError(f"unknown example {example!r}; choose from {', '.join(CATALOGUE)}")
    return table[example](**kwargs)
