import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwtpp.generator import (
    GenerationError,
    GenParams,
    ScanPoint,
    ScanReport,
    bracket,
    generate_random,
    native_solve,
    scaled_family_params,
    scan_capacity,
)
from wwtpp.model import Timeout, validate_instance


def test_random_set_shape():
    inst = generate_random(GenParams(seed=4))
    assert inst.k == 10 and inst.m == 26
    assert inst.n_discharges == 114
    assert validate_instance(inst).ok
    assert all(d.end <= 24 for _, d in inst.discharges())
    assert inst.plant_capacity == 0


def test_same_seed_same_instance():
    assert generate_random(GenParams(seed=9)) == generate_random(GenParams(seed=9))
    assert generate_random(GenParams(seed=9)) != generate_random(GenParams(seed=10))


def test_pigeonhole_placement_error():
    params = GenParams(industries=1, discharges_total=3, horizon=2, planning_window=2,
                       duration_range=(1, 1))
    with pytest.raises(GenerationError):
        generate_random(params)


def test_balanced_split():
    inst = generate_random(GenParams(industries=3, discharges_total=10, horizon=12,
                                     planning_window=12, seed=1))
    assert sorted(len(ind.discharges) for ind in inst.industries) == [3, 3, 4]


def test_zero_discharge_industries_allowed():
    inst = generate_random(GenParams(industries=4, discharges_total=2, horizon=5,
                                     planning_window=5))
    assert inst.n_discharges == 2 and inst.k == 4


@pytest.mark.parametrize(
    "changes",
    [
        {"flow_range": (5, 1)},
        {"planning_window": 30},
        {"industries": 0, "discharges_total": 1},
        {"tank_flow_range": (-1, 2)},
    ],
)
def test_params_validation(changes):
    with pytest.raises(ValueError):
        GenParams().replace(**changes)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(0, 30),
    st.integers(1, 20),
    st.integers(0, 2**32),
)
def test_generated_instances_are_valid(k, total, window, seed):
    params = GenParams(industries=k, discharges_total=total, horizon=window + 1,
                       planning_window=window, duration_range=(1, 3), seed=seed)
    try:
        inst = generate_random(params)
    except GenerationError:
        assert -(-total // k) > window  # only when even unit durations cannot fit
        return
    assert validate_instance(inst).ok
    assert inst.n_discharges == total
    assert all(d.end <= window for _, d in inst.discharges())


def test_scan_bracketed_single_switch():
    inst = generate_random(scaled_family_params(2))
    lo, hi = bracket(inst)
    report = scan_capacity(inst, lo, hi, 1)
    assert report.monotone and report.switches == 1
    assert report.points[0].verdict == "unsat" and report.points[-1].verdict == "sat"
    assert report.threshold == next(p.capacity for p in report.points if p.verdict == "sat")


def test_scan_above_threshold_all_sat():
    inst = generate_random(scaled_family_params(2))
    _, hi = bracket(inst)
    report = scan_capacity(inst, hi, hi + 10, 5)
    assert {p.verdict for p in report.points} == {"sat"}
    assert report.threshold == hi


def test_scan_below_threshold_all_unsat():
    # one tiny tank and a plant too small for any discharge period
    from wwtpp.model import Discharge, Industry, Instance

    inst = Instance(0, 4, (Industry("1", 1, 1, (Discharge(1, 2, 5),)),))
    report = scan_capacity(inst, 0, 4, 1)
    assert {p.verdict for p in report.points} == {"unsat"}
    assert report.threshold is None


def test_scan_parallel_matches_serial():
    inst = generate_random(scaled_family_params(5))
    lo, hi = bracket(inst)
    serial = scan_capacity(inst, lo, hi, 3)
    parallel = scan_capacity(inst, lo, hi, 3, jobs=2)
    assert [(p.capacity, p.verdict, p.nodes) for p in serial.points] == [
        (p.capacity, p.verdict, p.nodes) for p in parallel.points
    ]


def test_scan_rejects_bad_ranges():
    inst = generate_random(scaled_family_params(0))
    with pytest.raises(ValueError):
        scan_capacity(inst, 5, 1, 1)
    with pytest.raises(ValueError):
        scan_capacity(inst, 1, 5, 0)


def test_timeouts_excluded_from_judgement():
    points = [
        ScanPoint(0, "unsat", 0.1, 1),
        ScanPoint(1, "sat", 0.1, 1),
        ScanPoint(2, "timeout", 5.0, 9),
        ScanPoint(3, "sat", 0.1, 1),
    ]
    report = ScanReport.from_points(points)
    assert report.monotone and report.threshold == 1 and report.switches == 1
    assert report.hardest().capacity == 2


def test_inversion_detected():
    report = ScanReport.from_points([ScanPoint(0, "sat", 0, 0), ScanPoint(1, "unsat", 0, 0)])
    assert not report.monotone


def test_csv_format():
    report = ScanReport.from_points([ScanPoint(3, "sat", 0.0125, 7), ScanPoint(1, "unsat", 0.001, 2)])
    assert report.to_csv() == "capacity,verdict,ms,nodes\n1,unsat,1.000,2\n3,sat,12.500,7\n"


def test_scan_with_custom_solver():
    def always_timeout(inst, limit):
        return Timeout(), 0

    inst = generate_random(scaled_family_params(0))
    report = scan_capacity(inst, 0, 3, 1, solve_fn=always_timeout)
    assert report.threshold is None and report.monotone


def test_native_solve_passes_limit():
    inst = generate_random(scaled_family_params(3)).with_capacity(30)
    verdict, _ = native_solve(inst, 1e-9)
    assert isinstance(verdict, Timeout)
