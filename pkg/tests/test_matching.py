from cstardyn import matching


def test_perfect_matching_identity_graph():
    adj = [[0], [1], [2]]
    assert matching.perfect_matching(adj, 3) == (0, 1, 2)


def test_perfect_matching_complete_graph_is_deterministic():
    adj = [[0, 1, 2]] * 3
    assert matching.perfect_matching(adj, 3) == (0, 1, 2)


def test_perfect_matching_needs_augmenting():
    # row 0 grabs column 0 first and must be rerouted
    adj = [[0, 1], [0]]
    assert matching.perfect_matching(adj, 2) == (1, 0)


def test_no_perfect_matching_and_hall_witness():
    adj = [[0], [0], [0, 1]]
    assert matching.perfect_matching(adj, 3) is None
    violator = matching.hall_violator(adj, 3)
    assert violator is not None
    neighborhood = set()
    for r in violator:
        neighborhood.update(adj[r])
    assert len(neighborhood) < len(violator)


def test_hall_witness_for_empty_row():
    adj = [[], [0, 1]]
    violator = matching.hall_violator(adj, 2)
    assert violator == (0,)


def test_maximum_matching_partial():
    adj = [[0], [0]]
    match = matching.maximum_matching(adj, 1)
    assert match.count(None) == 1
