"""Statistics helpers: rates, confidence intervals, packet latency arithmetic."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evacsim.metrics import (
    CSV_HEADER,
    DcMetrics,
    RunMetrics,
    ci95,
    csv_rows,
    evacuated_rate,
    expand_packet_latencies,
    item_packet_stats,
    packet_count,
    summarize,
    volume_by_priority,
)
from evacsim.policy import Policy


def build_segments(size, rate_spans, t0=0.0):
    """Constant-rate spans (rate_bps, duration); the last runs to completion.

    Returns segments shaped like a real transmission: byte counts accumulate
    and the final entry pins bytes to the exact item size.
    """
    segs = []
    b, t = 0.0, t0
    for i, (rate, dt) in enumerate(rate_spans):
        time_to_done = (size - b) * 8.0 / rate
        if i == len(rate_spans) - 1 or time_to_done <= dt:
            segs.append((t, t + time_to_done, rate, b, float(size)))
            return segs
        b1 = b + rate * dt / 8.0
        segs.append((t, t + dt, rate, b, b1))
        b, t = b1, t + dt
    return segs


class TestEvacuatedRate:
    def test_basic_percentages(self):
        assert evacuated_rate(50, 200) == 25.0
        assert evacuated_rate(200, 200) == 100.0
        assert evacuated_rate(0, 5) == 0.0

    def test_nothing_stored_is_zero(self):
        assert evacuated_rate(0, 0) == 0.0

    def test_saved_above_stored_rejected(self):
        with pytest.raises(ValueError):
            evacuated_rate(201, 200)


class TestVolumeByPriority:
    def test_sla_reports_levels_as_is(self):
        saved = {99: 3000, 95: 1500, 91: 0}
        assert volume_by_priority(saved, Policy.SLA) == {95: 1500, 99: 3000}

    def test_lifo_reports_total_at_top_level(self):
        saved = {93: 1000, 97: 2000}
        assert volume_by_priority(saved, Policy.LIFO) == {99: 3000}

    def test_empty_saved_is_empty_either_way(self):
        assert volume_by_priority({}, Policy.SLA) == {}
        assert volume_by_priority({}, Policy.LIFO) == {}
        assert volume_by_priority({95: 0}, Policy.LIFO) == {}


class TestCi95:
    # Half-widths anchored to the published two-tailed t table:
    # df=1: 12.706, df=2: 4.303, df=5: 2.571.
    def test_three_sample_anchor(self):
        mean, half = ci95([1.0, 2.0, 3.0])
        assert mean == 2.0
        assert half == pytest.approx(4.303 / 3**0.5, abs=1e-3)
        assert abs(half - 2.484) <= 1e-3

    def test_two_sample_anchor(self):
        mean, half = ci95([0.0, 2.0])
        assert mean == 1.0
        # s = sqrt(2), so half = 12.706 * sqrt(2) / sqrt(2).
        assert half == pytest.approx(12.706, abs=1e-3)

    def test_six_sample_anchor(self):
        # Spread chosen for s = 1 exactly: five at 0 plus sqrt's complement.
        samples = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        samples = [x + d for x, d in zip(samples, [-1, -1, 0, 0, 1, 1])]
        mean, half = ci95(samples)
        assert mean == 0.0
        s = (4 / 5) ** 0.5
        assert half == pytest.approx(2.571 * s / 6**0.5, abs=1e-3)

    def test_identical_samples_have_zero_width(self):
        mean, half = ci95([7.5] * 6)
        assert mean == 7.5
        assert half == 0.0

    def test_single_sample_rejected(self):
        with pytest.raises(ValueError):
            ci95([1.0])
        with pytest.raises(ValueError):
            ci95([])

    def test_width_shrinks_with_replication(self):
        widths = []
        for k in (1, 2, 5, 25):
            _, half = ci95([0.0, 2.0] * k)
            widths.append(half)
        assert widths == sorted(widths, reverse=True)
        assert widths[-1] < widths[0] / 10


class TestPacketCount:
    def test_exact_and_fragment_sizes(self):
        assert packet_count(1500) == 1
        assert packet_count(1501) == 2
        assert packet_count(1) == 1
        assert packet_count(3000) == 2
        assert packet_count(15_000_000) == 10_000


class TestPacketStats:
    def test_single_segment_matches_expansion(self):
        size = 4000
        segs = build_segments(size, [(1e9, 1.0)])
        count, total = item_packet_stats(size, segs, 0.0)
        latencies = expand_packet_latencies(size, segs, 0.0)
        assert count == len(latencies) == 3
        assert total == pytest.approx(sum(latencies), rel=1e-12)

    def test_rate_change_mid_item(self):
        # 9000 B: first 4500 B at 1 Gbps (36 us), rest at 3 Gbps.
        size = 9000
        segs = build_segments(size, [(1e9, 36e-6), (3e9, 1.0)])
        assert segs[0][4] == pytest.approx(4500.0)
        count, total = item_packet_stats(size, segs, 0.0)
        latencies = expand_packet_latencies(size, segs, 0.0)
        assert count == 6
        assert total == pytest.approx(sum(latencies), rel=1e-12)

    def test_offset_exactly_on_segment_boundary_counted_once(self):
        # The boundary lands on packet 3's end offset: it belongs to the
        # first segment, and the second must not recount it.
        size = 6000
        segs = build_segments(size, [(1e9, 36e-6), (2e9, 1.0)])
        assert segs[0][4] == 4500.0
        count, _total = item_packet_stats(size, segs, 0.0)
        assert count == 4

    def test_detection_offset_shifts_latency(self):
        size = 1500
        segs = build_segments(size, [(1e9, 1.0)], t0=10.0)
        _, at_zero = item_packet_stats(size, segs, 0.0)
        _, at_ten = item_packet_stats(size, segs, 10.0)
        assert at_zero - at_ten == pytest.approx(10_000.0)  # ms

    def test_sub_packet_item(self):
        size = 700
        segs = build_segments(size, [(1e9, 1.0)])
        count, total = item_packet_stats(size, segs, 0.0)
        assert count == 1
        assert total == pytest.approx(700 * 8 / 1e9 * 1000, rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(
        size=st.integers(min_value=1, max_value=3_000_000),
        spans=st.lists(
            st.tuples(
                st.sampled_from([1e8, 5e8, 1e9, 2.5e9, 5e9, 1e10]),
                st.floats(min_value=1e-5, max_value=0.005),
            ),
            min_size=1,
            max_size=5,
        ),
        detection=st.floats(min_value=0.0, max_value=100.0),
    )
    def test_closed_form_equals_expansion(self, size, spans, detection):
        segs = build_segments(size, spans, t0=detection + 0.5)
        count, total = item_packet_stats(size, segs, detection)
        latencies = expand_packet_latencies(size, segs, detection)
        assert count == len(latencies) == packet_count(size)
        assert total == pytest.approx(sum(latencies), rel=1e-9, abs=1e-9)

    def test_idle_gap_between_segments(self):
        # settle() drops zero-rate stretches, so simulate a gap by jumping t0.
        size = 4500
        first = build_segments(3000, [(1e9, 24e-6)], t0=0.0)[0]
        first = (first[0], first[1], first[2], 0.0, 3000.0)
        second = (5.0, 5.0 + 1500 * 8 / 1e9, 1e9, 3000.0, 4500.0)
        count, total = item_packet_stats(size, [first, second], 0.0)
        latencies = expand_packet_latencies(size, [first, second], 0.0)
        assert count == 3
        assert total == pytest.approx(sum(latencies), rel=1e-12)
        assert max(latencies) > 5000.0


def make_dc_metrics(dc="DC1", **kw) -> DcMetrics:
    base = dict(
        dc=dc,
        clients=20,
        stored_bytes=3_000_000,
        saved_bytes=1_500_000,
        lost_bytes=1_500_000,
        evacuated_rate_pct=50.0,
        volume_by_priority={99: 1_500_000},
        saved_bytes_by_sla={99: 1_500_000},
        saved_pre_detection_bytes_by_sla={99: 1_500_000},
        stored_count_by_sla={99: 2},
        saved_count_by_sla={99: 1},
        packet_count=1000,
        packet_latency_sum_ms=1.25e6,
    )
    base.update(kw)
    return DcMetrics(**base)


class TestRecords:
    def test_mean_latency_none_without_packets(self):
        m = make_dc_metrics(packet_count=0, packet_latency_sum_ms=0.0)
        assert m.mean_latency_ms is None
        m2 = make_dc_metrics()
        assert m2.mean_latency_ms == pytest.approx(1250.0)

    def test_round_trip_through_dict(self):
        run = RunMetrics(
            run_id="bw5_cl20_sla_r00",
            seed=123,
            policy="sla",
            bandwidth_gbps=5.0,
            attack_at_s=15.0,
            window_s=5.0,
            per_dc=[make_dc_metrics("DC1"), make_dc_metrics("DC2", packet_count=0)],
        )
        again = RunMetrics.from_dict(run.to_dict())
        assert again == run

    def test_csv_rows_shape_and_values(self):
        run = RunMetrics(
            run_id="r1",
            seed=7,
            policy="lifo",
            bandwidth_gbps=2.5,
            attack_at_s=15.0,
            window_s=5.0,
            per_dc=[make_dc_metrics("DC1", volume_by_priority={95: 500, 99: 1000})],
        )
        rows = csv_rows(run)
        assert len(rows) == 1
        row = dict(zip(CSV_HEADER, rows[0]))
        assert row["run_id"] == "r1"
        assert row["policy"] == "lifo"
        assert row["bandwidth_gbps"] == "2.5"
        assert row["vol_sla_95"] == "500"
        assert row["vol_sla_99"] == "1000"
        assert row["vol_sla_90"] == "0"
        assert row["saved_bytes"] == "1500000"
        assert row["evacuated_rate_pct"] == "50.0"
        assert row["mean_latency_ms"] == repr(1.25e6 / 1000)

    def test_csv_integer_bandwidth_renders_bare(self):
        run = RunMetrics("r", 1, "sla", 5.0, 15.0, 5.0, [make_dc_metrics()])
        assert csv_rows(run)[0][4] == "5"

    def test_csv_blank_latency_without_packets(self):
        run = RunMetrics(
            "r", 1, "sla", 5.0, 15.0, 5.0,
            [make_dc_metrics(packet_count=0, packet_latency_sum_ms=0.0)],
        )
        assert csv_rows(run)[0][-1] == ""


def obs(run_id, policy, dc, saved, latency, bw="5", clients="20"):
    return {
        "run_id": run_id,
        "policy": policy,
        "dc": dc,
        "bandwidth_gbps": bw,
        "clients": clients,
        "saved_bytes": str(saved),
        "stored_bytes": str(saved * 2),
        "evacuated_rate_pct": "50.0",
        "mean_latency_ms": "" if latency is None else repr(latency),
    }


class TestSummarize:
    def test_group_means_match_hand_average(self):
        rows = [
            obs("a", "sla", "DC1", 100, 10.0),
            obs("b", "sla", "DC1", 200, 20.0),
            obs("c", "sla", "DC1", 300, 30.0),
            obs("d", "lifo", "DC1", 50, 5.0),
        ]
        result = summarize(rows)
        by_key = {(g["policy"], g["dc"]): g for g in result["groups"]}
        sla = by_key[("sla", "DC1")]
        assert sla["n"] == 3
        assert sla["metrics"]["saved_bytes"]["mean"] == 200.0
        assert sla["metrics"]["mean_latency_ms"]["mean"] == 20.0
        assert sla["metrics"]["saved_bytes"]["ci95_half_width"] == pytest.approx(
            4.303 * 100 / 3**0.5, abs=0.1
        )
        lifo = by_key[("lifo", "DC1")]
        assert lifo["n"] == 1
        assert lifo["metrics"]["saved_bytes"]["ci95_half_width"] is None

    def test_blank_latency_rows_are_skipped(self):
        rows = [
            obs("a", "sla", "DC1", 100, None),
            obs("b", "sla", "DC1", 200, 15.0),
            obs("c", "sla", "DC1", 300, 25.0),
        ]
        metrics = summarize(rows)["groups"][0]["metrics"]
        assert metrics["saved_bytes"]["n"] == 3
        assert metrics["mean_latency_ms"]["n"] == 2
        assert metrics["mean_latency_ms"]["mean"] == 20.0

    def test_output_invariant_to_input_order(self):
        rows = [
            obs("a", "sla", "DC1", 100, 10.0),
            obs("b", "sla", "DC2", 200, 20.0),
            obs("c", "lifo", "DC1", 300, 30.0),
            obs("d", "sla", "DC1", 400, 40.0),
        ]
        expected = summarize(rows)
        for seed in range(5):
            shuffled = rows[:]
            random.Random(seed).shuffle(shuffled)
            assert summarize(shuffled) == expected
