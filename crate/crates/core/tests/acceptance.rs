//! Acceptance runner: one pass/fail line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{random_invertible, random_invertible_system, random_regular_singular_system, rng, words};
use rand::Rng;
use swreach::bounds::{run_bound_experiment, sample_system, BoundExperimentConfig, RankMode, RankSpec};
use swreach::examples::cycle_swap;
use swreach::extremal::{
    canonical_weights, family_a, family_degenerate, family_degenerate_rank, family_rank, verify_weight_certificate,
    FamilyTag,
};
use swreach::reach::{ge_characterization, GE_DEFAULT_BUDGET};
use swreach::reduction::{find_block_transform, TransformOrigin};
use swreach::search::invertible_length_bound;
use swreach::system::feedback_regularize;
use swreach::{
    concat_identity_check, greedy_controllable_sequence, is_controllable, reachable_set, reachable_space_of_sequence,
    shortest_controllable_sequences, v_chain, ModeSequence, SearchStatus, Subspace, SwitchedSystem,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn shortest(sys: &SwitchedSystem, cap: Option<usize>) -> Result<Option<usize>, String> {
    let res = shortest_controllable_sequences(sys, cap, 1).map_err(|e| e.to_string())?;
    Ok(res.shortest_length)
}

fn cycle_swap_reproduction() -> Outcome {
    let start = Instant::now();
    let sys = cycle_swap();
    let res = shortest_controllable_sequences(&sys, None, 1000).map_err(|e| e.to_string())?;
    ensure(res.shortest_length == Some(6), || {
        format!("shortest length {:?}", res.shortest_length)
    })?;
    let found: Vec<String> = res.witnesses.iter().map(|w| w.to_string()).collect();
    for expected in ["122121", "121121", "121221"] {
        ensure(found.iter().any(|w| w == expected), || {
            format!("{expected} missing from {found:?}")
        })?;
    }
    let capped = shortest_controllable_sequences(&sys, Some(5), 1).map_err(|e| e.to_string())?;
    ensure(
        capped.status == SearchStatus::NotControllableWithinDepth && capped.shortest_length.is_none(),
        || format!("cap 5 gave {:?}", capped.status),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "length 6, witnesses {}, cap 5 inconclusive, {elapsed:?}",
        found.join(" ")
    ))
}

fn family_a_tightness() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 2..=6 {
        for m in 2..=n {
            let expected = n + m * (m - 1) / 2;
            let sys = family_a(n, m).map_err(|e| e.to_string())?;
            let len = shortest(&sys, None)?;
            ensure(len == Some(expected), || {
                format!("family_a({n},{m}): BFS {len:?}, expected {expected}")
            })?;
            let w = canonical_weights(FamilyTag::SingleInput, n, None, m).map_err(|e| e.to_string())?;
            let cert = verify_weight_certificate(&sys, &w).map_err(|e| e.to_string())?;
            ensure(cert.holds && cert.lower_bound as usize == expected, || {
                format!("family_a({n},{m}): certificate {} / {}", cert.holds, cert.lower_bound)
            })?;
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{cases} (n, m) pairs, BFS = certificate = n + m(m-1)/2, {elapsed:?}"
    ))
}

fn invertible_upper_bound() -> Outcome {
    let mut rng = rng(0xac3);
    let mut kept = 0;
    let mut drawn = 0;
    let mut longest = 0;
    while kept < 200 {
        drawn += 1;
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let sys = random_invertible_system(&mut rng, n, m);
        if !is_controllable(&sys).map_err(|e| e.to_string())? {
            continue;
        }
        kept += 1;
        let bound = invertible_length_bound(n);
        let len = shortest(&sys, None)?.ok_or_else(|| format!("controllable system without sequence ≤ {bound}"))?;
        ensure(len <= bound, || format!("length {len} > {bound}"))?;
        let greedy = greedy_controllable_sequence(&sys).map_err(|e| e.to_string())?;
        let reached = reachable_space_of_sequence(&sys, &greedy).map_err(|e| e.to_string())?;
        ensure(reached.is_full() && greedy.len() <= bound, || {
            format!("greedy {greedy} (len {}) fails or exceeds {bound}", greedy.len())
        })?;
        longest = longest.max(len);
    }
    Ok(format!(
        "200 controllable of {drawn} drawn, max length {longest}, greedy verified"
    ))
}

fn rank_formulas() -> Outcome {
    let mut families = 0;
    for n in 3..=6 {
        for r in 1..n {
            for m in 2..=n - r {
                let expected = n - r + 1 + m * (m - 1) / 2;
                let len = shortest(&family_rank(n, r, m).map_err(|e| e.to_string())?, None)?;
                ensure(len == Some(expected), || {
                    format!("family_rank({n},{r},{m}): BFS {len:?}, expected {expected}")
                })?;
                families += 1;
            }
        }
    }
    let mut rng = rng(0xac4);
    let mut controllable = 0;
    for sample in 0..100 {
        let n = rng.gen_range(2..=5);
        let r = rng.gen_range(1..n);
        let m = rng.gen_range(1..=3);
        let sys = sample_system(n, m, RankSpec::AtLeast(r), 2, rng.gen()).map_err(|e| e.to_string())?;
        let bound = (n - r + 1) * (n - r) / 2 + 1;
        if let Some(len) = shortest(&sys, None)? {
            controllable += 1;
            ensure(len <= bound, || {
                format!("sample {sample}: length {len} > {bound} (n={n}, r={r})")
            })?;
        }
    }
    let cfg = BoundExperimentConfig {
        n_range: [2, 4],
        r_range: [1, 3],
        m_range: [1, 3],
        samples: 40,
        rank_mode: RankMode::Exactly,
        seed: 4,
        ..Default::default()
    };
    let report = run_bound_experiment(&cfg).map_err(|e| e.to_string())?;
    ensure(report.total_violations == 0, || report.to_table())?;
    for cell in &report.cells {
        if cell.r == cell.n - 1 {
            ensure(cell.max_len.is_none_or(|l| l <= 2), || format!("cell {:?}", cell))?;
        }
        if (cell.n, cell.r) == (3, 1) {
            ensure(cell.max_len.is_none_or(|l| l <= 4), || format!("cell {:?}", cell))?;
        }
    }
    Ok(format!(
        "{families} families exact, {controllable}/100 random rank ≥ r within bound, {} cells clean",
        report.cells.len()
    ))
}

fn degenerate_formulas() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=6 {
        for m in 2..=n {
            let expected = (n - m + 1) * m + m * (m - 1) / 2;
            let len = shortest(&family_degenerate(n, m).map_err(|e| e.to_string())?, Some(64))?;
            checked += 1;
            if len != Some(expected) {
                failures.push(format!("family_degenerate({n},{m}): BFS {len:?}, formula {expected}"));
            }
        }
        for r in 1..n {
            for m in 2..=n - r {
                let expected = m * (2 * n - m - 2 * r + 1) / 2 + 1;
                let len = shortest(&family_degenerate_rank(n, r, m).map_err(|e| e.to_string())?, Some(64))?;
                checked += 1;
                if len != Some(expected) {
                    failures.push(format!(
                        "family_degenerate_rank({n},{r},{m}): BFS {len:?}, formula {expected}"
                    ));
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} degenerate instances match their closed forms"))
    } else {
        Err(format!(
            "{} of {checked} mismatched: {}",
            failures.len(),
            failures.join("; ")
        ))
    }
}

fn ge_equivalence() -> Outcome {
    let check = |sys: &SwitchedSystem| -> Result<(), String> {
        let ge = ge_characterization(sys, GE_DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let r = reachable_set(sys).map_err(|e| e.to_string())?;
        ensure(ge == r, || format!("ge {ge} vs reachable set {r}"))
    };
    check(&cycle_swap())?;
    let mut rng = rng(0xac6);
    let mut dims = [0usize; 4];
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let sys = random_invertible_system(&mut rng, n, 2);
        check(&sys)?;
        dims[reachable_set(&sys).unwrap().dim()] += 1;
    }
    Ok(format!(
        "cycle-swap system + 100 random systems agree (reachable dims histogram {dims:?})"
    ))
}

fn structural_identities() -> Outcome {
    let mut rng = rng(0xac7);
    // fixed point of the V chain
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let sys = random_invertible_system(&mut rng, n, m);
        let chain = v_chain(&sys);
        let dims = chain.dims();
        ensure(chain.ell <= n, || format!("ℓ = {} > n = {n}", chain.ell))?;
        ensure(dims.windows(2).all(|w| w[0] < w[1]), || {
            format!("dims not strictly increasing: {dims:?}")
        })?;
        let next = sys.modes().iter().fold(chain.fixed_point().clone(), |acc, md| {
            acc.sum(&chain.fixed_point().image(md.a()).unwrap()).unwrap()
        });
        ensure(&next == chain.fixed_point(), || "V_ℓ is not a fixed point".into())?;
    }
    // concatenation identity
    let mut pairs = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let sys = random_invertible_system(&mut rng, n, m);
        let word = |rng: &mut rand_chacha::ChaCha8Rng| {
            let len = rng.gen_range(0..=4);
            ModeSequence((0..len).map(|_| rng.gen_range(1..=m)).collect())
        };
        let (p1, p2) = (word(&mut rng), word(&mut rng));
        ensure(concat_identity_check(&sys, &p1, &p2).unwrap(), || {
            format!("concat fails for {p1}·{p2}")
        })?;
        pairs += 1;
    }
    // union identity, exhaustive over words of length ≤ p
    let mut union_cases = 0;
    for n in 1..=3 {
        for _ in 0..10 {
            let sys = random_invertible_system(&mut rng, n, 2);
            let chain = v_chain(&sys);
            let mut union = Subspace::zero(n);
            for p in 1..=3 {
                for w in words(2, p) {
                    union = union
                        .sum(&reachable_space_of_sequence(&sys, &ModeSequence(w)).unwrap())
                        .unwrap();
                }
                ensure(union == chain.space(p), || {
                    format!("V_{p} differs from the union over words ≤ {p}")
                })?;
                union_cases += 1;
            }
        }
    }
    // block shear with invertible trailing block
    let mut shears = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let m = random_invertible(&mut rng, n, 3);
        for r in 1..n {
            let t = find_block_transform(&m, r).map_err(|e| e.to_string())?;
            ensure(t.origin() != TransformOrigin::Random, || {
                "constructive choice fell back to random".into()
            })?;
            let block = t.trailing_block(&m).unwrap();
            ensure(block.determinant().unwrap() != swreach::rat(0), || {
                "singular trailing block".into()
            })?;
            shears += 1;
        }
    }
    Ok(format!(
        "100 chains, {pairs} concatenations, {union_cases} union checks, {shears} constructive shears"
    ))
}

fn regularization_equivalence() -> Outcome {
    let mut rng = rng(0xac8);
    let mut sequences = 0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=2);
        let sys = random_regular_singular_system(&mut rng, n, m);
        let reg = feedback_regularize(&sys).map_err(|e| e.to_string())?;
        ensure(reg.all_a_invertible(), || "regularized system still singular".into())?;
        for len in 0..=4 {
            for w in words(m, len) {
                let seq = ModeSequence(w);
                let a = reachable_space_of_sequence(&sys, &seq).unwrap();
                let b = reachable_space_of_sequence(&reg, &seq).unwrap();
                ensure(a == b, || format!("R({seq}) differs: {a} vs {b}"))?;
                sequences += 1;
            }
        }
    }
    Ok(format!("50 systems, {sequences} sequences agree"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1", "cycle-swap system shortest sequences", cycle_swap_reproduction),
        ("AC2", "family_a tightness with certificate", family_a_tightness),
        ("AC3", "invertible-case n(n+1)/2 upper bound", invertible_upper_bound),
        ("AC4", "rank-r formulas and bounds", rank_formulas),
        ("AC5", "degenerate family formulas", degenerate_formulas),
        ("AC6", "term-sum characterization equivalence", ge_equivalence),
        (
            "AC7",
            "chain, concatenation, union and shear identities",
            structural_identities,
        ),
        ("AC8", "feedback regularization equivalence", regularization_equivalence),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("[PASS] {id} {title}: {detail} ({:.2?})", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {detail} ({:.2?})", start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
