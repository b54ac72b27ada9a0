"""Topology, generation, energies, exhaustive search, serialization."""

import numpy as np
import pytest

from wscbench.instance import (
    BRUTE_FORCE_SITE_LIMIT,
    ChimeraCoord,
    InstanceFormatError,
    ProblemInstance,
    ValidationError,
    all_down_state,
    brute_force_ground_state,
    build_chimera,
    chain_layout,
    generate_network,
    ladder_layout,
    parse_instance,
    random_state,
    serialize_instance,
)

# Scaled single-pair reference values, computed by hand from the construction:
# 36 ferromagnetic couplers of +25 (16 per cell, 4 between), 8 fields of -25,
# 8 fields of +11.  All-down satisfies every coupler: E = -36*25 - 8*25 + 8*11
# = -900 - 200 + 88 = -1012.  Flipping the weak cell breaks only the 4 shared
# couplers and gains its fields: -1012 + 8*25 - 8*11*... recomputed directly:
# -32*25 + 4*25 - 8*25 - 8*11 = -988.
SINGLE_PAIR_GS = -1012
SINGLE_PAIR_TRAP = -988


def single_pair():
    return generate_network(ladder_layout(1), 25)


# ---------------------------------------------------------------------------
# chimera topology
# ---------------------------------------------------------------------------


def test_chimera_cell_counts():
    g = build_chimera(1, 1)
    assert g.n == 8
    assert len(g.edges) == 16

    g = build_chimera(1, 2)
    assert g.n == 16
    assert len(g.edges) == 36

    g = build_chimera(2, 2)
    assert g.n == 32
    assert len(g.edges) == 80


@pytest.mark.parametrize("rows", [1, 2, 3, 4])
@pytest.mark.parametrize("cols", [1, 2, 3, 4])
def test_chimera_edge_formula(rows, cols):
    g = build_chimera(rows, cols)
    assert g.n == 8 * rows * cols
    assert len(g.edges) == 16 * rows * cols + 4 * rows * (cols - 1) + 4 * (rows - 1) * cols
    assert len(set(g.edges)) == len(g.edges)


def test_chimera_grid_bounds():
    with pytest.raises(ValidationError):
        build_chimera(0, 2)
    with pytest.raises(ValidationError):
        build_chimera(2, 5)


def test_site_numbering_round_trip():
    g = build_chimera(2, 3)
    seen = set()
    for r in range(2):
        for c in range(3):
            for side in (0, 1):
                for slot in range(4):
                    coord = ChimeraCoord(r, c, side, slot)
                    site = g.site_index(coord)
                    assert g.coord_at(site) == coord
                    seen.add(site)
    assert seen == set(range(g.n))


def test_shared_edges_join_equal_slots():
    g = build_chimera(1, 2)
    # horizontal neighbours share left-side couplers, equal slot only
    for slot in range(4):
        i = g.site_index(ChimeraCoord(0, 0, 0, slot))
        j = g.site_index(ChimeraCoord(0, 1, 0, slot))
        assert (min(i, j), max(i, j)) in g.edges
    cross = (
        g.site_index(ChimeraCoord(0, 0, 0, 0)),
        g.site_index(ChimeraCoord(0, 1, 0, 1)),
    )
    assert (min(cross), max(cross)) not in g.edges


# ---------------------------------------------------------------------------
# layouts and generation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("pairs", [1, 2, 3, 4, 5, 6, 9, 14, 25])
def test_ladder_layout_sizes(pairs):
    lay = ladder_layout(pairs)
    lay.validate()
    assert len(lay.pairs) == pairs
    assert len(lay.used_cells()) == 2 * pairs
    if pairs > 1:
        # backbone connects all strong cells
        strong = {s for s, _ in lay.pairs}
        adj = {c: set() for c in strong}
        for a, b, _ in lay.backbone:
            adj[a].add(b)
            adj[b].add(a)
        stack, seen = [next(iter(strong))], set()
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(adj[c])
        assert seen == strong


def test_chain_layout_is_a_path():
    lay = chain_layout(4)
    lay.validate()
    assert len(lay.backbone) == 3


def test_layout_rejects_bad_geometry():
    with pytest.raises(ValidationError):
        ladder_layout(0)
    lay = ladder_layout(2)
    with pytest.raises(ValidationError):
        # same cell in two pairs
        type(lay)(lay.grid_rows, lay.grid_cols, lay.pairs + (lay.pairs[0],), lay.backbone).validate()
    with pytest.raises(ValidationError):
        # weak cell on the backbone
        type(lay)(lay.grid_rows, lay.grid_cols, lay.pairs, (((1, 0), (0, 0), 1),)).validate()
    with pytest.raises(ValidationError):
        # ratio >= 1/2
        type(lay)(lay.grid_rows, lay.grid_cols, lay.pairs, lay.backbone, 13, 25).validate()


def test_single_pair_structure():
    inst = single_pair()
    assert inst.n == 16
    assert len(inst.couplings) == 36
    assert all(J == 25 for _, _, J in inst.couplings)
    values = sorted(h for _, h in inst.fields)
    assert values == [-25] * 8 + [11] * 8


def test_single_pair_oracle_energies():
    inst = single_pair()
    down = all_down_state(16)
    assert inst.energy(down) == SINGLE_PAIR_GS
    weak_block = next(
        k for k, cell in enumerate(inst.layout.used_cells()) if cell == inst.layout.pairs[0][1]
    )
    trap = down.copy()
    trap[8 * weak_block : 8 * weak_block + 8] = 1
    assert inst.energy(trap) == SINGLE_PAIR_TRAP
    assert inst.energy(trap) - inst.energy(down) == 24
    assert inst.reference_energy_scaled == SINGLE_PAIR_GS
    assert inst.reference_method == "exhaustive"


def test_generation_needs_divisible_scale():
    with pytest.raises(ValidationError):
        generate_network(ladder_layout(1), 10)


def test_generation_draws_signs_deterministically():
    lay = ladder_layout(4)
    a = generate_network(lay, 25, np.random.default_rng(7))
    b = generate_network(lay, 25, np.random.default_rng(7))
    assert a == b
    assert a.n == 64
    signs = {s for _, _, s in a.layout.backbone}
    assert signs <= {-1, 1}
    with pytest.raises(ValidationError):
        generate_network(lay, 25)  # undrawn signs need an rng


@pytest.mark.parametrize("pairs,n", [(4, 64), (9, 144), (16, 256), (25, 400)])
def test_benchmark_family_sizes(pairs, n):
    inst = generate_network(ladder_layout(pairs), 25, np.random.default_rng(pairs))
    assert inst.n == n
    assert {h for _, h in inst.fields} == {-25, 11}
    assert all(abs(J) == 25 for _, _, J in inst.couplings)
    assert all(i < j for i, j, _ in inst.couplings)
    assert list(inst.couplings) == sorted(inst.couplings)


def test_construction_reference_beats_or_equals_all_down():
    for seed in range(6):
        inst = generate_network(ladder_layout(5), 25, np.random.default_rng(seed))
        assert inst.reference_energy_scaled <= inst.energy(all_down_state(inst.n))


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------


def test_energy_is_exact_integer():
    inst = single_pair()
    e = inst.energy(all_down_state(16))
    assert isinstance(e, int)


def test_two_site_ferromagnet_deltas():
    inst = ProblemInstance(n=2, scale=25, fields=(), couplings=((0, 1, 25),))
    aligned = np.array([-1, -1], dtype=np.int8)
    assert inst.energy(aligned) == -25
    assert inst.delta_energy(aligned, 0) == 50
    assert inst.delta_energy(aligned, 1) == 50


def test_isolated_site_field_delta():
    inst = ProblemInstance(n=1, scale=25, fields=((0, 25),), couplings=())
    up = np.array([1], dtype=np.int8)
    assert inst.energy(up) == -25
    assert inst.delta_energy(up, 0) == 50


def test_delta_matches_energy_difference():
    rng = np.random.default_rng(11)
    inst = generate_network(ladder_layout(2), 25, rng)
    for _ in range(50):
        s = random_state(inst.n, rng)
        e = inst.energy(s)
        for site in rng.integers(0, inst.n, size=8):
            flipped = s.copy()
            flipped[site] = -flipped[site]
            assert inst.energy(flipped) - e == inst.delta_energy(s, int(site))


def test_zero_field_global_flip_symmetry():
    rng = np.random.default_rng(5)
    inst = ProblemInstance(
        n=6,
        scale=25,
        fields=(),
        couplings=tuple(
            (i, j, int(rng.choice([-25, 25]))) for i in range(6) for j in range(i + 1, 6)
        ),
    )
    for _ in range(20):
        s = random_state(6, rng)
        assert inst.energy(s) == inst.energy(-s)


def test_offset_shifts_energy():
    inst = ProblemInstance(n=2, scale=25, fields=(), couplings=((0, 1, 25),), offset_scaled=-400)
    assert inst.energy(np.array([-1, -1], dtype=np.int8)) == -425


# ---------------------------------------------------------------------------
# exhaustive search
# ---------------------------------------------------------------------------


def test_brute_force_single_pair():
    inst = single_pair()
    e, state = brute_force_ground_state(inst)
    assert e == SINGLE_PAIR_GS
    assert np.array_equal(state, all_down_state(16))


def test_brute_force_field_only():
    inst = ProblemInstance(n=1, scale=25, fields=((0, 11),), couplings=())
    e, state = brute_force_ground_state(inst)
    assert e == -11
    assert state[0] == 1


def test_brute_force_tie_break_is_lexicographic():
    inst = ProblemInstance(n=2, scale=25, fields=(), couplings=((0, 1, -25),))
    e, state = brute_force_ground_state(inst)
    assert e == -25
    assert state.tolist() == [-1, 1]  # (-1,+1) sorts below (+1,-1)


def test_brute_force_refuses_large_instances():
    inst = ProblemInstance(n=BRUTE_FORCE_SITE_LIMIT + 1, scale=25, fields=(), couplings=())
    with pytest.raises(ValidationError, match=str(BRUTE_FORCE_SITE_LIMIT)):
        brute_force_ground_state(inst)


def test_brute_force_agrees_with_sampling():
    rng = np.random.default_rng(23)
    inst = generate_network(chain_layout(1), 25)
    e, _ = brute_force_ground_state(inst)
    best = min(inst.energy(random_state(inst.n, rng)) for _ in range(500))
    assert e <= best


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_instance_rejects_malformed_data():
    with pytest.raises(ValidationError, match="self-loop"):
        ProblemInstance(n=4, scale=25, fields=(), couplings=((2, 2, 25),))
    with pytest.raises(ValidationError, match="outside"):
        ProblemInstance(n=4, scale=25, fields=((9, 1),), couplings=())
    with pytest.raises(ValidationError, match="duplicate"):
        ProblemInstance(n=4, scale=25, fields=(), couplings=((0, 1, 25), (0, 1, -25)))
    with pytest.raises(ValidationError, match="sorted"):
        ProblemInstance(n=4, scale=25, fields=(), couplings=((1, 2, 25), (0, 1, 25)))
    with pytest.raises(ValidationError, match="scale"):
        ProblemInstance(n=4, scale=0, fields=(), couplings=())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_round_trip_preserves_everything():
    inst = generate_network(ladder_layout(3), 25, np.random.default_rng(2))
    text = serialize_instance(inst)
    again = parse_instance(text)
    assert again == inst
    assert serialize_instance(again) == text


def test_round_trip_with_offset():
    inst = ProblemInstance(
        n=2, scale=25, fields=((0, -200), (1, 88)), couplings=((0, 1, 100),), offset_scaled=-800
    )
    again = parse_instance(serialize_instance(inst))
    assert again == inst
    assert again.offset_scaled == -800


def test_serialization_is_byte_stable():
    inst = single_pair()
    assert serialize_instance(inst) == serialize_instance(parse_instance(serialize_instance(inst)))


def test_parse_rejects_self_loop():
    text = '{"format_version": 1, "n": 4, "scale": 25, "fields": [], "couplings": [[1, 1, 25]], "layout": null, "reference_energy_scaled": null, "reference_method": null}'
    with pytest.raises(InstanceFormatError, match=r"couplings\[0\].*self-loop"):
        parse_instance(text)


def test_parse_defaults_missing_scale():
    text = '{"format_version": 1, "n": 2, "fields": [], "couplings": [[0, 1, 25]], "layout": null, "reference_energy_scaled": null, "reference_method": null}'
    inst = parse_instance(text)
    assert inst.scale == 25
    assert inst.defaulted == ("scale",)


def test_parse_rejects_future_format_version():
    text = '{"format_version": 2, "n": 2, "scale": 25, "fields": [], "couplings": []}'
    with pytest.raises(InstanceFormatError, match="unsupported version 2"):
        parse_instance(text)


def test_parse_rejects_bad_json_with_location():
    with pytest.raises(InstanceFormatError, match="line"):
        parse_instance('{"format_version": 1,\n  "n": }')


def test_parse_normalizes_swapped_endpoints():
    text = '{"format_version": 1, "n": 3, "scale": 25, "fields": [], "couplings": [[2, 0, -25]], "layout": null, "reference_energy_scaled": null, "reference_method": null}'
    inst = parse_instance(text)
    assert inst.couplings == ((0, 2, -25),)


def test_parse_error_paths_name_the_field():
    text = '{"format_version": 1, "n": 2, "scale": 25, "fields": [[0, "x"]], "couplings": []}'
    with pytest.raises(InstanceFormatError, match=r"fields\[0\]"):
        parse_instance(text)
