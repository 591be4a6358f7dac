#![allow(clippy::needless_range_loop)]
//! Acceptance suite: one test per criterion, exact arithmetic throughout,
//! one pass line printed per criterion (visible with `--nocapture`).

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use liplab_core::adversary::{
    construct_gamma_star, verify_prefix_defeat, AdversaryOptions, AdversaryPrefix, TailRule,
};
use liplab_core::cube::{
    check_retraction_violation, component_of, cube_distance, cube_distance_bruteforce,
    defeat_family, nearest_point_in_sheet, normalize_point, CubePoint, CubeSpace, SheetSpec,
    GAMMA_STAR_SHEET,
};
use liplab_core::enumeration::RationalEnumeration;
use liplab_core::extension::{
    build_extension_pipeline, extension_operator, finite_net, local_map,
    packing_maximality_witnesses, separated_chain, DEFAULT_ENUMERATION_CAP,
};
use liplab_core::gaps::{build_gaps, GammaSequence, DEFAULT_HORIZON};
use liplab_core::lipschitz::{
    check_jump_length, jump_certificates, max_feasible_map, sweep_escape_check, sweeping,
    JumpCertificate,
};
use liplab_core::metric::{exact_lipschitz_constant, LipschitzSample};
use liplab_core::oracle::grid_dp_decide;
use liplab_core::rational::{rat, Rat};
use liplab_core::testkit::{
    gen_function, gen_gap_structure, gen_line_space, gen_sheet_point, gen_sheet_spec, gen_unit_rat,
    SplitMix64,
};

fn pass(criterion: u32, slug: &str, details: &str, started: Instant) {
    println!(
        "ACCEPTANCE {criterion} {slug}: PASS ({details}; {:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

// 1. Decider-oracle equivalence on >= 1000 random instances, zero tolerance.
#[test]
fn criterion_1_decider_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x0001_C0DE);
    let ks: Vec<Rat> = ["1", "3/2", "2", "3"].iter().map(|s| rat(s)).collect();
    let mut feasible = 0usize;
    const INSTANCES: usize = 1000;
    for i in 0..INSTANCES {
        let domain = gen_gap_structure(&mut rng, 8, 64);
        let codomain = gen_gap_structure(&mut rng, 8, 64);
        let k = &ks[i % ks.len()];
        let sweep = max_feasible_map(&domain, &codomain, k).unwrap();
        let dp = grid_dp_decide(&domain, &codomain, k);
        assert_eq!(sweep.feasible, dp.feasible, "instance {i}, K = {k}");
        if sweep.feasible {
            feasible += 1;
            for (x, best) in dp.grid.iter().zip(&dp.max_feasible_value) {
                let fstar = sweep.max_map.eval(x).unwrap();
                assert!(
                    best.as_ref().unwrap() <= &fstar,
                    "dominance failed at {x} on instance {i}"
                );
            }
        }
    }
    assert!(feasible >= 100, "suite too skewed: {feasible} feasible");
    pass(
        1,
        "decider-oracle-equivalence",
        &format!("{INSTANCES} instances, {feasible} feasible, verdicts and dominance exact"),
        started,
    );
}

fn geometric_family(eps0: &str, ratios: &[&str]) -> Vec<GammaSequence> {
    ratios
        .iter()
        .map(|r| {
            GammaSequence::geometric(
                rat(eps0),
                rat("1/4"),
                rat(r),
                64,
                RationalEnumeration::default(),
            )
            .unwrap()
        })
        .collect()
}

// 2. Adversary end-to-end on 10 pinned families plus 5 sabotaged controls.
#[test]
fn criterion_2_adversary_end_to_end() {
    let started = Instant::now();
    let enumeration = RationalEnumeration::default();
    let pinned: Vec<(&str, &str, Vec<&str>)> = vec![
        ("2", "1/4", vec!["1/2"]),
        ("3", "1/4", vec!["1/3"]),
        ("2", "1/4", vec!["1/2", "1/3"]),
        ("3", "3/10", vec!["1/3", "2/5"]),
        ("2", "1/4", vec!["2/5", "1/5"]),
        ("2", "1/4", vec!["1/2", "1/3", "1/5"]),
        ("3", "3/10", vec!["1/3", "1/4", "2/5"]),
        ("2", "1/4", vec!["3/7", "2/7", "1/7"]),
        ("2", "1/4", vec!["1/2", "1/3", "1/4", "1/5"]),
        ("3", "1/4", vec!["2/5", "1/3", "1/4", "1/6"]),
    ];
    let mut prefixes: Vec<(AdversaryPrefix, usize)> = Vec::new();
    for (idx, (k, eps0, ratios)) in pinned.iter().enumerate() {
        let family = geometric_family(eps0, ratios);
        let n = family.len();
        let k = rat(k);
        let prefix =
            construct_gamma_star(&family, &k, enumeration, &AdversaryOptions::default()).unwrap();
        let max_n_omega = prefix.steps.iter().map(|s| s.n_omega).max().unwrap_or(1);
        let depth_domain = n.max(4);
        let depth_codomain = max_n_omega.max(4) + 2;
        let verdicts = verify_prefix_defeat(
            &prefix,
            &TailRule::Geometric {
                ratio: rat("1/2"),
                extra_terms: depth_domain,
            },
            depth_domain,
            depth_codomain,
            enumeration,
            DEFAULT_HORIZON,
            None,
        )
        .unwrap();
        assert!(
            verdicts.iter().all(|v| v.infeasible),
            "family {idx} not defeated"
        );
        prefixes.push((prefix, n));
    }

    // negative controls: replace the prefix by member 1's own leading terms
    let mut broken = 0;
    for &idx in &[0usize, 2, 5, 8, 9] {
        let (prefix, n) = &prefixes[idx];
        let mut sabotaged = prefix.clone();
        sabotaged.gamma_star = prefix.family[0].terms()[..*n].to_vec();
        sabotaged.steps.clear();
        let verdicts = verify_prefix_defeat(
            &sabotaged,
            &TailRule::FinitelySupported,
            *n,
            *n,
            enumeration,
            DEFAULT_HORIZON,
            None,
        )
        .unwrap();
        assert!(
            verdicts.iter().any(|v| !v.infeasible),
            "sabotage {idx} stayed infeasible"
        );
        broken += 1;
    }
    assert_eq!(broken, 5);
    pass(
        2,
        "adversary-end-to-end",
        "10 pinned families defeated, 5 sabotaged prefixes admit a feasible member",
        started,
    );
}

// 3. Jump, length, and sweeping certificates on 500 feasible instances.
#[test]
fn criterion_3_certificate_suite() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x0003_ACED);
    let ks: Vec<Rat> = ["3/2", "2", "3"].iter().map(|s| rat(s)).collect();
    let mut done = 0usize;
    let mut attempts = 0usize;
    let mut sweep_checks = 0usize;
    while done < 500 {
        attempts += 1;
        assert!(attempts < 20_000, "generator starved after {attempts}");
        let domain = gen_gap_structure(&mut rng, 8, 64);
        let codomain = gen_gap_structure(&mut rng, 8, 64);
        let k = &ks[attempts % ks.len()];
        let res = max_feasible_map(&domain, &codomain, k).unwrap();
        if !res.feasible {
            continue;
        }
        done += 1;
        let certs = jump_certificates(&res.max_map, &domain, &codomain).unwrap();
        assert_eq!(certs.len(), codomain.gaps.len(), "coverage failed");
        let mut groups: Vec<Vec<JumpCertificate>> = Vec::new();
        for c in &certs {
            match groups
                .iter_mut()
                .find(|g| g[0].domain_gap.interval() == c.domain_gap.interval())
            {
                Some(g) => g.push(c.clone()),
                None => groups.push(vec![c.clone()]),
            }
        }
        for g in &groups {
            assert!(check_jump_length(g, k).unwrap());
            for a in 0..g.len() {
                for b in 0..g.len() {
                    if a == b {
                        continue;
                    }
                    for r in ["1/16", "1/8", "1/4", "1/2"] {
                        if let Ok(v) = sweep_escape_check(&g[a], &g[b], &rat(r), k) {
                            assert!(v, "escape bound failed at r = {r}");
                            sweep_checks += 1;
                        }
                    }
                }
            }
        }
    }
    // sweeping arithmetic on random intervals
    for _ in 0..500 {
        let a = gen_unit_rat(&mut rng, 64);
        let b = &a + gen_unit_rat(&mut rng, 64) + Rat::new(1, 64);
        let r = gen_unit_rat(&mut rng, 64) + Rat::new(1, 64);
        let sw = sweeping(&a, &b, &r).unwrap();
        match sw.result {
            Some(_) => {
                assert_eq!(sw.length(), Rat::int(2) * &r - (&b - &a));
                assert!(sw.length() < Rat::int(2) * &r);
            }
            None => assert!(Rat::int(2) * &r <= &b - &a),
        }
    }
    pass(
        3,
        "certificate-suite",
        &format!(
            "500 feasible instances covered, {sweep_checks} escape checks, sweeping lengths exact"
        ),
        started,
    );
}

/// Adjacent endpoints with an empty open interval between them name exactly
/// their gap.
fn endpoint_pairs_are_gaps(gs: &liplab_core::gaps::GapStructure) {
    for g in &gs.gaps {
        match gs.consecutive_pair_check(&g.left, &g.right()).unwrap() {
            liplab_core::gaps::PairCheck::IsGap(h) => {
                assert_eq!(h.source_index, g.source_index)
            }
            other => panic!("expected the gap back, got {other:?}"),
        }
    }
}

// 4. Structure invariants across the corpus and the exact minimality audit.
#[test]
fn criterion_4_structure_invariants() {
    let started = Instant::now();
    let enumeration = RationalEnumeration::default();
    let mut audited = 0usize;
    let ratios = ["1/2", "1/3", "2/5", "1/4", "3/7"];
    let eps0s = ["1/4", "1/3", "3/10", "1/8", "2/5"];
    for (i, (r, e)) in ratios
        .iter()
        .flat_map(|r| eps0s.iter().map(move |e| (r, e)))
        .enumerate()
    {
        let depth = 4 + (i % 5);
        let gamma = GammaSequence::geometric(rat(e), rat("1/4"), rat(r), 64, enumeration).unwrap();
        let gs = build_gaps(&gamma, enumeration, depth, DEFAULT_HORIZON).unwrap();
        gs.validate().unwrap();
        assert!(gs.complement_measure_bound() >= *gs.gamma.eps0());
        gs.minimality_audit().unwrap();
        endpoint_pairs_are_gaps(&gs);
        audited += 1;
    }
    // finitely supported mixtures
    let mut rng = SplitMix64::new(0x0004_F00D);
    while audited < 50 {
        let first = Rat::new(1, 3 + (rng.below(6) as i64));
        let second = &first / Rat::int(2);
        let third = &first / Rat::int(4);
        let gamma =
            GammaSequence::finitely_supported(rat("1/8"), vec![first, second, third], enumeration)
                .unwrap();
        let gs = build_gaps(&gamma, enumeration, 3, DEFAULT_HORIZON).unwrap();
        gs.validate().unwrap();
        assert!(gs.complement_measure_bound() >= *gs.gamma.eps0());
        gs.minimality_audit().unwrap();
        endpoint_pairs_are_gaps(&gs);
        audited += 1;
    }
    // synthetic corpus keeps the type invariants
    let mut rng2 = SplitMix64::new(0x0004_BEEF);
    for _ in 0..200 {
        let gs = gen_gap_structure(&mut rng2, 8, 64);
        gs.validate().unwrap();
        assert!(gs.complement_measure_bound() >= *gs.gamma.eps0());
    }
    pass(
        4,
        "structure-invariants",
        &format!("{audited} built structures audited exactly, 200 synthetic validated"),
        started,
    );
}

// 5. Witness algebra, candidate-retraction violations, brute-force agreement.
#[test]
fn criterion_5_cube_witness_algebra() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x0005_C0BE);
    let ks: Vec<Rat> = ["1", "3/2", "2", "3"].iter().map(|s| rat(s)).collect();
    for i in 0..100 {
        let lambda = 2 + (i % 5);
        let family: Vec<(String, SheetSpec)> = (0..lambda)
            .map(|b| (format!("s{b}"), gen_sheet_spec(&mut rng, lambda, 24)))
            .collect();
        let k = &ks[i % ks.len()];
        let w = defeat_family(&family, k, None).unwrap();
        // exact witness algebra
        assert_eq!(w.d_p_q, Rat::int(2) * &w.gamma_star.gamma[w.beta0]);
        assert_eq!(k * &w.d_p_q, family[w.beta0].1.gamma[w.beta0]);
        assert_eq!(component_of(&w.p_star), Vec::<u32>::new());
        assert_eq!(component_of(&w.q_star), vec![w.beta0 as u32]);

        // nearest-point candidate retraction violates the budget
        let (p_coords, q_coords) = match (&w.p_star, &w.q_star) {
            (CubePoint::Inner { coords: p, .. }, CubePoint::Inner { coords: q, .. }) => (p, q),
            _ => unreachable!(),
        };
        let sheet_id = family[w.beta0].0.clone();
        let rp = normalize_point(
            nearest_point_in_sheet(p_coords, &family[w.beta0].1).unwrap(),
            &sheet_id,
        );
        let rq = normalize_point(
            nearest_point_in_sheet(q_coords, &family[w.beta0].1).unwrap(),
            &sheet_id,
        );
        let table = vec![
            (CubePoint::vertex([]), CubePoint::vertex([])),
            (
                CubePoint::vertex([w.beta0 as u32]),
                CubePoint::vertex([w.beta0 as u32]),
            ),
            (w.p_star.clone(), rp),
            (w.q_star.clone(), rq),
        ];
        let report = check_retraction_violation(&table, k, &w).unwrap();
        assert!(report.issues.is_empty(), "instance {i} left the model");
        assert!(report.violated, "instance {i} did not violate the budget");
        assert!(report.lhs > report.rhs);

        // optimized distance agrees with the brute force on the witness space
        let space = w.space().unwrap();
        for _ in 0..4 {
            let a_sheet = &family[rng.below(lambda as u64) as usize];
            let b_sheet = GAMMA_STAR_SHEET;
            let pa = normalize_point(gen_sheet_point(&mut rng, &a_sheet.1, 16), &a_sheet.0);
            let pb = normalize_point(gen_sheet_point(&mut rng, &w.gamma_star, 16), b_sheet);
            if space.validate_point(&pa).is_err() || space.validate_point(&pb).is_err() {
                continue;
            }
            assert_eq!(
                cube_distance(&pa, &pb, &space).unwrap(),
                cube_distance_bruteforce(&pa, &pb, &space).unwrap()
            );
        }

        // metric axioms on triples mixing sheets and vertices
        let mut pts = vec![
            CubePoint::vertex([]),
            CubePoint::vertex([w.beta0 as u32]),
            w.p_star.clone(),
            w.q_star.clone(),
        ];
        for (id, sheet) in family.iter().take(2) {
            let cand = normalize_point(gen_sheet_point(&mut rng, sheet, 16), id);
            if space.validate_point(&cand).is_ok() {
                pts.push(cand);
            }
        }
        for a in 0..pts.len() {
            for b in 0..pts.len() {
                let dab = cube_distance(&pts[a], &pts[b], &space).unwrap();
                assert_eq!(dab, cube_distance(&pts[b], &pts[a], &space).unwrap());
                assert_eq!(dab.is_zero(), pts[a] == pts[b]);
                for c in 0..pts.len() {
                    let dac = cube_distance(&pts[a], &pts[c], &space).unwrap();
                    let dcb = cube_distance(&pts[c], &pts[b], &space).unwrap();
                    assert!(dab <= dac + dcb, "triangle failed on instance {i}");
                }
            }
        }
    }
    // dedicated brute-force agreement up to dimension 12
    for lambda in 2..=12usize {
        for _ in 0..6 {
            let sa = gen_sheet_spec(&mut rng, lambda, 24);
            let sb = gen_sheet_spec(&mut rng, lambda, 24);
            let mut sheets = BTreeMap::new();
            sheets.insert("a".to_string(), sa.clone());
            sheets.insert("b".to_string(), sb.clone());
            let space = CubeSpace::new(sheets).unwrap();
            let pa = normalize_point(gen_sheet_point(&mut rng, &sa, 16), "a");
            let pb = normalize_point(gen_sheet_point(&mut rng, &sb, 16), "b");
            if space.validate_point(&pa).is_err() || space.validate_point(&pb).is_err() {
                continue;
            }
            assert_eq!(
                cube_distance(&pa, &pb, &space).unwrap(),
                cube_distance_bruteforce(&pa, &pb, &space).unwrap(),
                "distance mismatch at dimension {lambda}"
            );
        }
    }
    pass(
        5,
        "cube-witness-algebra",
        "100 families exact, candidate retractions violated, brute force agrees through dimension 12",
        started,
    );
}

fn distinct_cluster_space(
    rng: &mut SplitMix64,
    centers: &[Rat],
    per_cluster: usize,
    tight: &Rat,
) -> liplab_core::metric::FiniteMetricSpace {
    loop {
        let mut coords: Vec<Rat> = Vec::new();
        for c in centers {
            for _ in 0..per_cluster {
                let x = c + gen_unit_rat(rng, 64) * tight;
                if x <= Rat::one() {
                    coords.push(x);
                }
            }
        }
        coords.sort();
        coords.dedup();
        if coords.len() >= centers.len() + 2 {
            if let Ok(m) = liplab_core::metric::FiniteMetricSpace::line(&coords) {
                return m;
            }
        }
    }
}

// 6. Full-quantifier net/chain/operator checks on 30 random spaces.
#[test]
fn criterion_6_extension_full_quantifier() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x0006_4E75);
    let mut exhaustive_sets = 0usize;
    for i in 0..30usize {
        // (a) nets: every admissible extension must match, checked exhaustively
        let (space, k) = if i % 3 == 2 {
            (gen_line_space(&mut rng, 40, 64), 1 + i % 2)
        } else {
            (gen_line_space(&mut rng, 18, 64), 1 + i % 3)
        };
        let n = space.len();
        let want = (2 + i % 3).min(n - 1);
        let mut f_set = vec![space.base()];
        while f_set.len() < want {
            let cand = rng.below(n as u64) as usize;
            if !f_set.contains(&cand) {
                f_set.push(cand);
            }
        }
        f_set.sort_unstable();
        let spacing = space.min_pairwise(&f_set).unwrap();
        let eps = std::cmp::min(spacing.clone(), rat("1/16"));
        let net = finite_net(&space, &f_set, k, &eps, None, DEFAULT_ENUMERATION_CAP).unwrap();

        let pool: Vec<usize> = (0..n).filter(|p| !f_set.contains(p)).collect();
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(extras) = stack.pop() {
            if extras.len() < k {
                let next_start = extras.last().map(|&e| e + 1).unwrap_or(0);
                for (j, &p) in pool.iter().enumerate().skip(next_start) {
                    let mut more = extras.clone();
                    more.push(j);
                    let _ = p;
                    stack.push(more);
                }
            }
            if extras.is_empty() {
                continue;
            }
            let e_set: Vec<usize> = f_set
                .iter()
                .copied()
                .chain(extras.iter().map(|&j| pool[j]))
                .collect();
            if !space.is_separated(&e_set, &eps) {
                continue;
            }
            exhaustive_sets += 1;
            let lm = local_map(&e_set, &net, &space)
                .unwrap_or_else(|e| panic!("space {i}: no local map for {e_set:?}: {e}"));
            assert!(
                lm.lip <= Rat::one() + &eps,
                "space {i}: local map constant {} exceeds 1 + {eps}",
                lm.lip
            );
        }

        // (b) chains: construction properties plus the maximality surrogate
        let eps1 = &spacing / Rat::int(2);
        let eps2 = &spacing / Rat::int(4);
        let chain = separated_chain(
            &space,
            &[f_set.clone(), f_set.clone()],
            &[eps1.clone(), eps2.clone()],
        )
        .unwrap();
        for (lvl, d) in chain.d_chain.iter().enumerate() {
            for f in &chain.f_chain[lvl] {
                assert!(d.contains(f));
            }
            if lvl > 0 {
                for p in &chain.d_chain[lvl - 1] {
                    assert!(d.contains(p), "packing must grow");
                }
            }
            for k_up in lvl..chain.d_chain.len() {
                let mut merged = d.clone();
                for f in &chain.f_chain[k_up] {
                    if !merged.contains(f) {
                        merged.push(*f);
                    }
                }
                assert!(space.is_separated(&merged, &chain.eps_chain[k_up]));
            }
        }
        packing_maximality_witnesses(&chain, &space).unwrap();

        // (c) operators on clustered spaces: linear, extending, bounded;
        // one seed per cluster and pairwise-distinct center gaps keep every
        // separation comparison clear of the jitter scale
        let centers: Vec<Rat> = if i % 2 == 0 {
            ["0", "1/2", "7/8"].iter().map(|c| rat(c)).collect()
        } else {
            ["0", "1/2", "3/4", "15/16"]
                .iter()
                .map(|c| rat(c))
                .collect()
        };
        let cspace = distinct_cluster_space(&mut rng, &centers, 3 + i % 8, &rat("1/2000"));
        let cn = cspace.len();
        let gap_threshold = rat("1/50");
        let seeds: Vec<usize> = (1..cn)
            .filter(|&p| cspace.d(p - 1, p) > &gap_threshold)
            .collect();
        assert!(!seeds.is_empty() && seeds.len() <= 3);
        let levels =
            build_extension_pipeline(&cspace, &seeds, seeds.len(), DEFAULT_ENUMERATION_CAP)
                .unwrap();
        let f_chain: Vec<Vec<usize>> = levels.iter().map(|l| l.f_set.clone()).collect();
        let eps_chain: Vec<Rat> = levels.iter().map(|l| l.eps.clone()).collect();
        let cchain = separated_chain(&cspace, &f_chain, &eps_chain).unwrap();
        let op = extension_operator(&cspace, &levels, &cchain).unwrap();
        let delta = levels.last().unwrap().eps.clone();
        assert!(
            op.norm_certificate <= Rat::one() + &delta,
            "space {i}: certificate {} exceeds 1 + {delta}",
            op.norm_certificate
        );
        // extension on every level set below the top
        for below_top in &levels[..levels.len() - 1] {
            for p in below_top.f_set.iter().chain(&below_top.net.z) {
                assert_eq!(op.assignment[p], *p);
            }
        }
        for f in &levels.last().unwrap().f_set {
            assert_eq!(op.assignment[f], *f);
        }
        // exact linearity and the composed norm bound for 20 random functions
        for _ in 0..20 {
            let raw = gen_function(&mut rng, op.s.len(), 32);
            let f: BTreeMap<usize, Rat> = op.s.iter().cloned().zip(raw.iter().cloned()).collect();
            let g: BTreeMap<usize, Rat> =
                op.s.iter()
                    .map(|&p| (p, gen_unit_rat(&mut rng, 32)))
                    .collect();
            let tf = op.apply(&f).unwrap();
            let tg = op.apply(&g).unwrap();
            let combo: BTreeMap<usize, Rat> =
                op.s.iter()
                    .map(|&p| (p, Rat::int(2) * &f[&p] + Rat::int(5) * &g[&p]))
                    .collect();
            let tcombo = op.apply(&combo).unwrap();
            for j in 0..tf.len() {
                assert_eq!(tcombo[j], Rat::int(2) * &tf[j] + Rat::int(5) * &tg[j]);
            }
            // Lip(Tf) <= (1 + delta) Lip(f) over all pairs
            let lip_f = {
                let mut best = Rat::zero();
                let ids: Vec<usize> = op.s.clone();
                for a in 0..ids.len() {
                    for b in (a + 1)..ids.len() {
                        let q = (&f[&ids[a]] - &f[&ids[b]]).abs() / cspace.d(ids[a], ids[b]);
                        if q > best {
                            best = q;
                        }
                    }
                }
                best
            };
            let lip_tf = exact_lipschitz_constant(&tf, &cspace);
            assert!(lip_tf <= (Rat::one() + &delta) * &lip_f);
        }
    }
    pass(
        6,
        "extension-full-quantifier",
        &format!(
            "30 spaces, {exhaustive_sets} admissible sets matched exhaustively, operators linear and bounded"
        ),
        started,
    );
}

// 7. Cone-lattice norming properties and McShane maximality, exactly.
#[test]
fn criterion_7_norming_and_mcshane() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x0007_C04E);
    let lams = ["1", "3/2", "2"];
    let epss = ["1/10", "1/4", "1/2"];
    for i in 0..100usize {
        let space = gen_line_space(&mut rng, 14, 48);
        let n = space.len();
        let base = space.base();
        // normalized function vanishing at the base
        let raw = gen_function(&mut rng, n, 32);
        let shifted: Vec<Rat> = raw.iter().map(|v| v - &raw[base]).collect();
        let lip = exact_lipschitz_constant(&shifted, &space);
        let f: Vec<Rat> = if lip > Rat::one() {
            shifted.iter().map(|v| v / &lip).collect()
        } else {
            shifted
        };
        let mut f_set = vec![base];
        for _ in 0..rng.range(1, 4) {
            let cand = rng.below(n as u64) as usize;
            if !f_set.contains(&cand) {
                f_set.push(cand);
            }
        }
        let lam = rat(lams[i % lams.len()]);
        let eps = rat(epss[(i / 3) % epss.len()]);
        let slope = &lam * (Rat::one() + &eps);
        let g = liplab_core::extension::norming_function(&f, &f_set, &lam, &eps, &space).unwrap();
        for &x in &f_set {
            assert_eq!(g[x], f[x], "instance {i}: mismatch on the set");
        }
        assert!(g[base].is_zero());
        assert!(exact_lipschitz_constant(&g, &space) <= slope);
        for p in 0..n {
            if !g[p].is_zero() {
                let in_cone_ball = f_set
                    .iter()
                    .any(|&x| !f[x].is_zero() && space.d(p, x) < &(f[x].abs() / &slope));
                assert!(in_cone_ball, "instance {i}: support escaped at {p}");
                let in_base_ball = f_set
                    .iter()
                    .any(|&x| space.d(p, x) < &(space.d(x, base) / &slope));
                assert!(
                    in_base_ball,
                    "instance {i}: base-ball support escaped at {p}"
                );
            }
        }

        // McShane: exact extension, exact constant, pointwise maximal
        let mut table = BTreeMap::new();
        for &x in &f_set {
            table.insert(x, f[x].clone());
        }
        let mut l = Rat::zero();
        let keys: Vec<usize> = table.keys().copied().collect();
        for a in 0..keys.len() {
            for b in (a + 1)..keys.len() {
                let q = (&table[&keys[a]] - &table[&keys[b]]).abs() / space.d(keys[a], keys[b]);
                if q > l {
                    l = q;
                }
            }
        }
        if l.is_zero() {
            l = Rat::one();
        }
        let sample = LipschitzSample {
            values: table.clone(),
            constant: l.clone(),
        };
        let upper = liplab_core::extension::mcshane_extend(&sample, &space, &l).unwrap();
        let upper_values: Vec<Rat> = (0..n).map(|p| upper.values[&p].clone()).collect();
        assert!(exact_lipschitz_constant(&upper_values, &space) <= l);
        for (&x, v) in &table {
            assert_eq!(&upper.values[&x], v);
        }
        // lower extension and mixtures never exceed the upper extension
        let lower: Vec<Rat> = (0..n)
            .map(|p| {
                table
                    .iter()
                    .map(|(&y, fy)| fy - &l * space.d(p, y))
                    .max()
                    .unwrap()
            })
            .collect();
        assert!(exact_lipschitz_constant(&lower, &space) <= l);
        for p in 0..n {
            assert!(lower[p] <= upper.values[&p]);
            let mid = (&lower[p] + &upper.values[&p]) / Rat::int(2);
            assert!(mid <= upper.values[&p]);
        }
        let mid_all: Vec<Rat> = (0..n)
            .map(|p| (&lower[p] + &upper.values[&p]) / Rat::int(2))
            .collect();
        assert!(exact_lipschitz_constant(&mid_all, &space) <= l);
    }
    pass(
        7,
        "norming-and-mcshane",
        "100 instances: lattice properties and extension maximality exact",
        started,
    );
}

// 8. Byte determinism of certificates across reruns and parallelism degrees.
#[test]
fn criterion_8_certificate_determinism() {
    let started = Instant::now();
    let dir = std::env::temp_dir().join(format!("liplab-acceptance-8-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, contents: &str| std::fs::write(dir.join(name), contents).unwrap();

    write(
        "gamma.json",
        r#"{"schema_version":1,"eps0":"1/4","terms":["1/4","1/8","1/16","1/32"],"tail_bound":"0"}"#,
    );
    write(
        "family.json",
        r#"{"schema_version":1,"members":[
          {"eps0":"1/4","geometric":{"first":"1/4","ratio":"1/2","count":64}},
          {"eps0":"1/4","geometric":{"first":"1/4","ratio":"1/3","count":64}}
        ]}"#,
    );
    write(
        "cubefam.json",
        r#"{"schema_version":1,"sheets":[["s0",{"gamma":["1/10","1/5"]}],["s1",{"gamma":["1/5","2/5"]}]]}"#,
    );
    let mut matrix = String::from("p0 p1 p2 p3 p4 p5 p6 p7 p8\n");
    for i in 0..9i64 {
        let row: Vec<String> = (0..9i64)
            .map(|j| {
                let d = (i - j).abs();
                match d {
                    0 => "0".into(),
                    8 => "1".into(),
                    _ => format!("{d}/8"),
                }
            })
            .collect();
        matrix.push_str(&row.join(" "));
        matrix.push('\n');
    }
    matrix.push_str("base p0\n");
    write("space.txt", &matrix);
    write(
        "levels.json",
        r#"{"schema_version":1,"f_chain":[["p0","p8"],["p0","p8"]],"eps_chain":["1/2","1/4"]}"#,
    );
    let mut cl = String::from("a0 a1 b0 b1 c0 c1\n");
    let coords = ["0", "1/100", "1/2", "51/100", "99/100", "1"];
    let cv: Vec<Rat> = coords.iter().map(|c| rat(c)).collect();
    for i in 0..6 {
        let row: Vec<String> = (0..6)
            .map(|j| (&cv[i] - &cv[j]).abs().to_string())
            .collect();
        cl.push_str(&row.join(" "));
        cl.push('\n');
    }
    cl.push_str("base a0\n");
    write("clspace.txt", &cl);

    // stage 1: artifacts the batch scenarios reference
    let bin = env!("CARGO_BIN_EXE_liplab");
    let run = |args: &[&str]| {
        let out = Command::new(bin)
            .args(args)
            .current_dir(&dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&[
        "build-gaps",
        "--gamma",
        "gamma.json",
        "--depth",
        "4",
        "--out",
        "gs.json",
    ]);
    run(&[
        "make-adversary",
        "--family",
        "family.json",
        "--k",
        "2",
        "--out",
        "prefix.json",
    ]);
    run(&[
        "cube-defeat",
        "--family",
        "cubefam.json",
        "--k",
        "2",
        "--out",
        "witness.json",
    ]);
    write(
        "gspace.json",
        &format!(
            r#"{{"schema_version":1,"sheets":{{"g1":{},"g2":{}}}}}"#,
            std::fs::read_to_string(dir.join("gs.json")).unwrap().trim(),
            std::fs::read_to_string(dir.join("gs.json")).unwrap().trim()
        ),
    );
    write(
        "table.json",
        r#"{"schema_version":1,"table":[
          {"x":"0","image":{"tag":"base0"}},
          {"x":"7/8","image":{"tag":"inner","sheet":"g1","x":"7/8"}},
          {"x":"1","image":{"tag":"base1"}}
        ]}"#,
    );

    let batch = r#"{"schema_version":1,"batch":[
      {"schema_version":1,"kind":"build-gaps","inputs":{"gamma":"gamma.json"},"parameters":{"depth":"4"},"seed":1,"out":"c-build.json"},
      {"schema_version":1,"kind":"decide-lip","inputs":{"domain":"gs.json","codomain":"gs.json"},"parameters":{"k":"2","expect":"feasible"},"seed":2,"out":"c-decide.json"},
      {"schema_version":1,"kind":"make-adversary","inputs":{"family":"family.json"},"parameters":{"k":"2"},"seed":3,"out":"c-make.json"},
      {"schema_version":1,"kind":"verify-adversary","inputs":{"prefix":"prefix.json"},"parameters":{"depth_domain":"4","depth_codomain":"8"},"seed":4,"out":"c-verify.json"},
      {"schema_version":1,"kind":"glue-dist","inputs":{"space":"gspace.json"},"parameters":{"p":"{\"tag\":\"base0\"}","q":"{\"tag\":\"inner\",\"sheet\":\"g2\",\"x\":\"7/8\"}"},"seed":5,"out":"c-glue.json"},
      {"schema_version":1,"kind":"collapse","inputs":{"space":"gspace.json","table":"table.json"},"parameters":{"k":"2"},"seed":6,"out":"c-collapse.json"},
      {"schema_version":1,"kind":"cube-defeat","inputs":{"family":"cubefam.json"},"parameters":{"k":"2,3"},"seed":7,"out":"c-cube.json"},
      {"schema_version":1,"kind":"net","inputs":{"space":"space.txt"},"parameters":{"points":"p0,p8","k":"1","eps":"1/8"},"seed":8,"out":"c-net.json"},
      {"schema_version":1,"kind":"chain","inputs":{"space":"space.txt","levels":"levels.json"},"parameters":{},"seed":9,"out":"c-chain.json"},
      {"schema_version":1,"kind":"extend","inputs":{"space":"clspace.txt"},"parameters":{"seeds":"c0,b0","levels":"2"},"seed":10,"out":"c-extend.json"}
    ]}"#;
    write("batch.json", batch);

    let certs = [
        "c-build.json",
        "c-decide.json",
        "c-make.json",
        "c-verify.json",
        "c-glue.json",
        "c-collapse.json",
        "c-cube.json",
        "c-net.json",
        "c-chain.json",
        "c-extend.json",
    ];
    let snapshot = |tag: &str| -> Vec<String> {
        certs
            .iter()
            .map(|c| {
                std::fs::read_to_string(dir.join(c))
                    .unwrap_or_else(|_| panic!("{tag}: missing {c}"))
                    .lines()
                    .filter(|l| !l.contains("wall_clock_ms"))
                    .collect::<Vec<_>>()
                    .join("\n")
            })
            .collect()
    };

    run(&["run-scenario", "--scenario", "batch.json", "--jobs", "1"]);
    let first = snapshot("first");
    run(&["run-scenario", "--scenario", "batch.json", "--jobs", "1"]);
    let second = snapshot("second");
    run(&["run-scenario", "--scenario", "batch.json", "--jobs", "8"]);
    let parallel = snapshot("parallel");
    for ((a, b), c) in first.iter().zip(&second).zip(&parallel) {
        assert_eq!(a, b, "rerun changed a certificate");
        assert_eq!(a, c, "parallelism changed a certificate");
    }
    let _ = std::fs::remove_dir_all(&dir);
    pass(
        8,
        "certificate-determinism",
        &format!(
            "{} certificates byte-identical across reruns and jobs 1 vs 8",
            certs.len()
        ),
        started,
    );
}
