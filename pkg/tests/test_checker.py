"""Local rule checking and the global soundness condition."""

from prhl.assertions import BoundedOracle
from prhl.certificates import (
    CyclicPreProof,
    PrhlNode,
    ProofNode,
    Triple,
    parse_proof,
)
from prhl.checker import check_cprhl, check_prhl, global_soundness
from prhl.semantics import Bounds
from prhl.syntax import parse_assertion as pa, parse_program as pp

B = Bounds(6, 2000, 16)


def triple(pre, prog, post):
    return Triple(pa(pre), pp(prog), pa(post))


# --- tree system ----------------------------------------------------------------


def test_axiom_and_assign_nodes():
    ok = PrhlNode("Axiom", triple("x = 1", "skip", "x = 1")).to_proof()
    assert check_prhl(ok, bounds=B).accepted
    bad = PrhlNode("Axiom", triple("x = 1", "skip", "x = 2")).to_proof()
    r = check_prhl(bad, bounds=B)
    assert not r.accepted and r.nodes["n1"].status == "rule-mismatch"

    assign = PrhlNode("Assign", triple("x + 1 = 2", "x := x + 1", "x = 2")).to_proof()
    assert check_prhl(assign, bounds=B).accepted
    wrong = PrhlNode("Assign", triple("x = 1", "x := x + 1", "x = 2")).to_proof()
    r = check_prhl(wrong, bounds=B)
    assert not r.accepted
    assert "Assign pre should be" in r.nodes["n1"].detail


def test_seq_node_checks_midpoint():
    left = PrhlNode("Assign", triple("x + 1 = 2", "x := x + 1", "x = 2"))
    right = PrhlNode("Assign", triple("x = 2", "x := x", "x = 2"))
    root = PrhlNode("Seq", triple("x + 1 = 2", "x := x + 1; x := x", "x = 2"), (left, right))
    assert check_prhl(root.to_proof(), bounds=B).accepted

    broken = PrhlNode(
        "Seq",
        triple("x + 1 = 2", "x := x + 1; x := x", "x = 2"),
        (left, PrhlNode("Assign", triple("x = 3", "x := x", "x = 2"))),
    )
    r = check_prhl(broken.to_proof(), bounds=B)
    assert not r.accepted
    assert "middle assertions differ" in r.nodes["n1"].detail


def test_cons_node_side_conditions():
    child = PrhlNode("Assign", triple("x + 1 = 2", "x := x + 1", "x = 2"))
    good = PrhlNode("Cons", triple("x <= 1", "x := x + 1", "x = 2"), (child,))
    assert check_prhl(good.to_proof(), bounds=B).accepted

    # x = 0 does not cover every store reaching the post
    bad = PrhlNode("Cons", triple("x = 0", "x := x + 1", "x = 2"), (child,))
    r = check_prhl(bad.to_proof(), bounds=B)
    assert not r.accepted
    nr = r.nodes["n1"]
    assert nr.status == "side-condition"
    assert "pre side" in nr.detail and "fails at {x: 1}" in nr.detail


def test_cons_node_bounded_sides_stay_ok():
    # the oracle cannot decide the side, so the node passes with a flag
    child = PrhlNode("Assign", triple("x + 1 = 2", "x := x + 1", "x = 2"))
    root = PrhlNode("Cons", triple("exists y. x = y + 20", "x := x + 1", "x = 2"), (child,))
    r = check_prhl(root.to_proof(), oracle=BoundedOracle(Bounds(6, 2000, 4)), bounds=B)
    assert r.accepted
    assert r.bounded
    assert r.bounded_flags == ("quantifier at node n1",)


def test_or_and_while_nodes():
    guard_pre = triple("x = 0 || x = 1", "(x := 0 + x := 1)", "x <= 1")
    orn = PrhlNode(
        "Or",
        guard_pre,
        (
            PrhlNode("Assign", triple("x = 0 || x = 1", "x := 0", "x <= 1")),
            PrhlNode("Assign", triple("x = 0 || x = 1", "x := 1", "x <= 1")),
        ),
    )
    r = check_prhl(orn.to_proof(), oracle=BoundedOracle(B))
    assert not r.accepted  # Or premises must share pre and post exactly
    fixed = PrhlNode(
        "Or",
        triple("0 <= 1", "(x := 0 + x := 1)", "x <= 1"),
        (
            PrhlNode("Assign", triple("0 <= 1", "x := 0", "x <= 1")),
            PrhlNode("Assign", triple("1 <= 1", "x := 1", "x <= 1")),
        ),
    )
    r2 = check_prhl(fixed.to_proof(), bounds=B)
    assert not r2.accepted  # right premise pre differs from the shared pre

    body = PrhlNode(
        "Cons",
        triple("x = 0 -> true", "x := x + 1", "true"),
        (PrhlNode("Assign", triple("true", "x := x + 1", "true")),),
    )
    w = PrhlNode("While", triple("true", "while x = 0 do { x := x + 1 }", "!(x = 0) -> true"), (body,))
    assert check_prhl(w.to_proof(), bounds=B).accepted
    w_bad = PrhlNode("While", triple("true", "while x = 0 do { x := x + 1 }", "true"), (body,))
    r3 = check_prhl(w_bad.to_proof(), bounds=B)
    assert not r3.accepted
    assert "conclusion post should be !guard -> pre" in r3.nodes["n1"].detail


def test_corpus_tree_certificate_accepted_clean():
    with open("corpus/ex3_prhl.json") as fh:
        proof = parse_proof(fh.read())
    r = check_prhl(proof, bounds=Bounds(8, 10000, 16))
    assert r.accepted and not r.bounded
    assert all(nr.ok for nr in r.nodes.values())


# --- cyclic system ----------------------------------------------------------------


def test_corpus_literal_transcription_rejected():
    # a tree proof transcribed node-for-node is not a cyclic proof: the
    # continuation bookkeeping shifts every rule's shape
    with open("corpus/ex4_literal.cprhl.json") as fh:
        proof = parse_proof(fh.read())
    r = check_cprhl(proof, bounds=Bounds(8, 10000, 16))
    assert not r.accepted
    assert r.global_status == "ok"
    failing = {nid: nr.status for nid, nr in r.nodes.items() if not nr.ok}
    assert failing == {
        "n1": "rule-mismatch",
        "n3": "rule-mismatch",
        "n4": "rule-mismatch",
        "n6": "rule-mismatch",
        "n7": "rule-mismatch",
        "n8": "side-condition",
    }
    assert "fails at {i: 0, x: 0}" in r.nodes["n8"].detail


def test_cyclic_axiom_and_assign_subst():
    proof = CyclicPreProof(
        "c1",
        {
            "c1": ProofNode("AssignSubst", triple("x + 1 = 1", "x := x + 1", "x = 1"), ("c2",)),
            "c2": ProofNode("Axiom", triple("x = 1", "skip", "x = 1"), ()),
        },
        {},
    )
    r = check_cprhl(proof, bounds=B)
    assert r.accepted and r.global_status == "ok"


def test_assign_fresh_orientations():
    # premise pre in the default reading: x = E[x := x'] && P[x := x'];
    # the strict flag instead demands x' = E[x := x'] on the left
    prem_default = "x = x_p1 + 1 && x_p1 = 1"
    prem_strict = "x_p1 = x_p1 + 1 && x_p1 = 1"

    def node_ok(premise_pre, strict):
        proof = CyclicPreProof(
            "c1",
            {
                "c1": ProofNode(
                    "AssignFresh", triple("x = 1", "x := x + 1", "x = 2"), ("c2",), fresh="x_p1"
                ),
                "c2": ProofNode("OpenLeaf", triple(premise_pre, "skip", "x = 2"), ()),
            },
            {},
        )
        return check_cprhl(proof, bounds=B, strict_fig4_assign=strict).nodes["c1"].ok

    assert node_ok(prem_default, strict=False)
    assert not node_ok(prem_strict, strict=False)
    assert node_ok(prem_strict, strict=True)
    assert not node_ok(prem_default, strict=True)


def test_assign_fresh_full_proof_accepted():
    # a closable instance: the old value is unconstrained, so the premise
    # pre collapses to the assigned equation
    proof = CyclicPreProof(
        "c1",
        {
            "c1": ProofNode("AssignFresh", triple("true", "x := 2", "x = 2"), ("c2",), fresh="x_p1"),
            "c2": ProofNode("Cons", triple("x = 2 && true", "skip", "x = 2"), ("c3",)),
            "c3": ProofNode("Axiom", triple("x = 2", "skip", "x = 2"), ()),
        },
        {},
    )
    r = check_cprhl(proof, bounds=B)
    assert r.accepted and r.global_status == "ok" and not r.bounded


def test_assign_fresh_rejects_used_name():
    proof = CyclicPreProof(
        "c1",
        {
            "c1": ProofNode("AssignFresh", triple("x = 1", "x := x + 1", "x = 2"), ("c2",), fresh="x"),
            "c2": ProofNode("Axiom", triple("x = 2", "skip", "x = 2"), ()),
        },
        {},
    )
    r = check_cprhl(proof, bounds=B)
    assert not r.accepted
    assert "not fresh" in r.nodes["c1"].detail


def test_cyclic_while_node_shape():
    w = "while x = 0 do { x := 1 }"
    proof = CyclicPreProof(
        "c1",
        {
            "c1": ProofNode("While", triple("true", w, "x = 1"), ("c2", "c3")),
            "c2": ProofNode("Cons", triple("!(x = 0) -> true", "skip", "x = 1"), ("c4",)),
            "c3": ProofNode(
                "AssignSubst", triple("x = 0 -> true", f"x := 1; {w}", "x = 1"), ("c5",)
            ),
            "c4": ProofNode("Axiom", triple("x = 1", "skip", "x = 1"), ()),
            "c5": ProofNode("OpenLeaf", triple("true", w, "x = 1"), ()),
        },
        {"c5": "c1"},
    )
    r = check_cprhl(proof, bounds=B)
    assert not r.accepted  # c3: conclusion pre must be the premise pre substituted
    fixed = CyclicPreProof(
        "c1",
        dict(
            proof.nodes,
            c3=ProofNode("Cons", triple("x = 0 -> true", f"x := 1; {w}", "x = 1"), ("c6",)),
            c6=ProofNode("AssignSubst", triple("true", f"x := 1; {w}", "x = 1"), ("c5",)),
        ),
        {"c5": "c1"},
    )
    r2 = check_cprhl(fixed, bounds=B)
    assert r2.accepted and r2.global_status == "ok"


def test_rule_needs_a_program_step():
    proof = CyclicPreProof(
        "c1",
        {
            "c1": ProofNode("AssignSubst", triple("true", "skip", "true"), ("c2",)),
            "c2": ProofNode("Axiom", triple("true", "skip", "true"), ()),
        },
        {},
    )
    r = check_cprhl(proof, bounds=B)
    assert not r.accepted
    assert "needs a program step" in r.nodes["c1"].detail


# --- global condition ---------------------------------------------------------------


def dummy(rule, kids=()):
    return ProofNode(rule, triple("true", "skip", "true"), tuple(kids))


def test_global_rejects_unlinked_open_leaf():
    proof = CyclicPreProof("c1", {"c1": dummy("Cons", ("c2",)), "c2": dummy("OpenLeaf")}, {})
    assert global_soundness(proof) == ("open-leaves", ("c2",))


def test_global_rejects_cons_only_cycle():
    proof = CyclicPreProof(
        "c1", {"c1": dummy("Cons", ("c2",)), "c2": dummy("OpenLeaf")}, {"c2": "c1"}
    )
    status, ids = global_soundness(proof)
    assert status == "cons-cycle"
    assert set(ids) == {"c1", "c2"}


def test_global_accepts_progress_guarded_cycle():
    proof = CyclicPreProof(
        "c1",
        {"c1": dummy("While", ("c2", "c3")), "c2": dummy("Axiom"), "c3": dummy("OpenLeaf")},
        {"c3": "c1"},
    )
    assert global_soundness(proof) == ("ok", ())
