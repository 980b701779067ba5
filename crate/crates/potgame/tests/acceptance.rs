//! Acceptance suite: seven end-to-end criteria, one pass/fail line each.
//! Everything is exact rational arithmetic unless noted (the Monte-Carlo
//! criterion samples with a recorded seed).

use num::{One, Zero};
use potgame::chain;
use potgame::dynamics::{is_fixed_point, simulate, Cadence, InfoMode, SurConfig};
use potgame::game::{FiniteGame, ObjectiveFunction, StrategyProfile};
use potgame::potential::{
    build_potential_equation, check_designability, design_utilities, is_potential,
    normalize_at_first, verify_potential_def,
};
use potgame::ratmat::{rat, Rat, RatMatrix};
use potgame::scenarios::{consensus4, pd_network, sync3};
use potgame::state_based::{build_mp, check_state_designability, Sep};
use potgame::stp::{delta_product, drawing_matrix, e_matrix, stp, swap_matrix, DeltaVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

fn criterion(n: usize, desc: &str, f: impl FnOnce() + std::panic::UnwindSafe) {
    let result = std::panic::catch_unwind(f);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} - {desc}");
    if let Err(e) = result {
        std::panic::resume_unwind(e);
    }
}

fn ints(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

#[test]
fn criterion_1_three_player_golden() {
    criterion(
        1,
        "three-player game: known solution satisfies the potential equation; \
         certificate matches the objective up to normalization",
        || {
            let g = sync3::game();
            let (a_mat, b) = build_potential_equation(&g).unwrap();
            let xi = RatMatrix::col_from_vec(sync3::known_xi());
            let product = a_mat.mul(&xi).unwrap();
            for (row, want) in b.iter().enumerate() {
                assert_eq!(&product[(row, 0)], want, "residual at row {row}");
            }
            let cert = is_potential(&g).expect("the game is potential");
            let phi = sync3::objective();
            assert_eq!(
                cert.normalized_v_p(),
                normalize_at_first(phi.block(1)),
                "certificate normalizes to the objective"
            );
            assert_eq!(
                cert.normalized_v_p(),
                normalize_at_first(&sync3::known_v_p()),
                "certificate normalizes to the known potential"
            );
            assert!(verify_potential_def(&g, &sync3::known_v_p()).unwrap());
        },
    );
}

#[test]
fn criterion_2_prisoners_dilemma_and_matching_pennies() {
    criterion(
        2,
        "Prisoner's Dilemma potential is [-2,0,0,1] up to normalization; \
         Matching Pennies has none",
        || {
            let fng = pd_network::prisoners_dilemma();
            let mut row_u = Vec::new();
            let mut col_u = Vec::new();
            for r in 1..=2 {
                for c in 1..=2 {
                    row_u.push(fng.row_payoff(r, c));
                    col_u.push(fng.col_payoff(r, c));
                }
            }
            let pd = FiniteGame::new(vec![2, 2], vec![row_u, col_u]).unwrap();
            let cert = is_potential(&pd).expect("PD is a potential game");
            assert_eq!(
                cert.normalized_v_p(),
                normalize_at_first(&pd_network::pd_potential())
            );
            assert!(verify_potential_def(&pd, &pd_network::pd_potential()).unwrap());
            let pennies = FiniteGame::new(
                vec![2, 2],
                vec![ints(&[1, -1, -1, 1]), ints(&[-1, 1, 1, -1])],
            )
            .unwrap();
            assert!(is_potential(&pennies).is_none());
        },
    );
}

#[test]
fn criterion_3_networked_game_design_golden() {
    criterion(
        3,
        "4-agent networked game: objective vector matches, all players \
         designable, designed utilities realize the objective as potential",
        || {
            let phi = pd_network::edge_potential_sum_objective();
            assert_eq!(phi.block(1), &pd_network::known_v_phi()[..]);
            let k = vec![2usize; 4];
            let topo = pd_network::topology();
            let neighborhoods: Vec<Vec<usize>> =
                (1..=4).map(|i| topo.neighborhood(i)).collect();
            assert!(check_designability(&phi, &neighborhoods, &k).unwrap());
            let design = design_utilities(&phi, &neighborhoods, &k)
                .unwrap()
                .expect("designable");
            let lifted = design.lifted_game(&neighborhoods, &k).unwrap();
            assert!(verify_potential_def(&lifted, phi.block(1)).unwrap());
        },
    );
}

#[test]
fn criterion_4_consensus_golden() {
    criterion(
        4,
        "switched-topology consensus: objective blocks, SEP-2 transition \
         blocks, designability, closed-form utilities, M_F excerpt",
        || {
            let phi = consensus4::objective();
            let known = consensus4::known_phi_blocks();
            for (x, block) in known.iter().enumerate() {
                assert_eq!(phi.block(x + 1), &block[..], "objective block {}", x + 1);
            }
            let k = vec![2usize; 4];
            let mp = build_mp(&phi, &k, Sep::Sep2).unwrap();
            let [b1, b2, b3] = consensus4::known_mp_blocks();
            let expected = b1.hstack(&b2).unwrap().hstack(&b3).unwrap();
            assert_eq!(mp.matrix(), &expected, "all 48 transition columns");
            let neighborhoods: Vec<Vec<Vec<usize>>> = consensus4::topologies()
                .iter()
                .map(|t| (1..=4).map(|i| t.neighborhood(i)).collect())
                .collect();
            assert!(check_state_designability(&phi, &neighborhoods, &k).unwrap());
            // 3 states x 16 profiles x 4 players x 1 deviation = 192 equations
            let g = consensus4::game_closed_form(Sep::Sep2);
            assert!(g.potential_matches_utilities().unwrap());
            assert!(g.state_process_monotone().unwrap());
            let mf = g.build_mf().unwrap();
            for (row, col, want) in consensus4::known_mf_entries() {
                assert_eq!(
                    mf.matrix()[(row - 1, col - 1)],
                    want,
                    "M_F entry ({row}, {col})"
                );
            }
        },
    );
}

#[test]
fn criterion_5_equilibrium_and_convergence() {
    criterion(
        5,
        "unique recurrent state equilibrium, absorption probability 1 from \
         all 48 pairs, 1000 seeded runs converge within 100 steps",
        || {
            let g = consensus4::game(Sep::Sep2);
            let k = vec![2usize; 4];
            let star = StrategyProfile::new(vec![1, 1, 1, 1], &k).unwrap();
            let rses = g.recurrent_state_equilibria();
            assert_eq!(rses.len(), 1, "unique recurrent state equilibrium");
            assert_eq!(rses[0].action, star);
            assert_eq!(
                rses[0].state_set.iter().copied().collect::<Vec<_>>(),
                vec![2, 3]
            );
            let joint = g.joint_chain().unwrap();
            let analysis = chain::analyze(&joint.0).unwrap();
            assert_eq!(analysis.closed_classes.len(), 1, "one closed class");
            let mut class = analysis.closed_classes[0].clone();
            class.sort_unstable();
            assert_eq!(
                class,
                vec![g.pair_index(2, &star) - 1, g.pair_index(3, &star) - 1],
                "closed class is {{(x2, a*), (x3, a*)}}"
            );
            for s in 0..analysis.n {
                assert_eq!(analysis.absorption[s], vec![Rat::one()], "pair {s}");
                assert!(analysis.expected_steps[s] >= Rat::zero());
            }
            // Monte Carlo: 1000 runs spread over the three reference initial
            // conditions, 100 steps each, recorded base seed.
            let base_seed: u64 = 0x5EED_2026;
            println!("criterion 5 monte carlo seed: {base_seed}");
            let inits = consensus4::initial_conditions();
            let converged: usize = (0..1000usize)
                .into_par_iter()
                .map(|r| {
                    let (x0, a0) = &inits[r % inits.len()];
                    let a0 = StrategyProfile::new(a0.clone(), &k).unwrap();
                    let trace = g
                        .simulate(*x0, a0, 100, base_seed.wrapping_add(r as u64))
                        .unwrap();
                    let reached = trace.converged_at.is_some_and(|t| t <= 100)
                        && trace.steps.last().unwrap().profile == star;
                    usize::from(reached)
                })
                .sum();
            println!("criterion 5 converged runs: {converged}/1000");
            assert!(converged >= 995, "only {converged}/1000 runs converged");
        },
    );
}

/// Candidate potential by integrating utility differences along the
/// coordinate path (1,..,1) -> a; the game is potential iff the candidate
/// passes the exhaustive deviation check.
fn integrated_potential(g: &FiniteGame) -> Vec<Rat> {
    let k = g.k().to_vec();
    StrategyProfile::all(&k)
        .map(|a| {
            let mut p = Rat::zero();
            let mut cur = StrategyProfile::new(vec![1; k.len()], &k).unwrap();
            for i in 1..=k.len() {
                let next = cur.with_strategy(i, a.0[i - 1]);
                p += g.payoff(i, &next) - g.payoff(i, &cur);
                cur = next;
            }
            p
        })
        .collect()
}

fn random_game(rng: &mut StdRng) -> FiniteGame {
    let n = rng.gen_range(2..=3);
    let k: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let total: usize = k.iter().product();
    let utilities = (0..n)
        .map(|_| (0..total).map(|_| rat(rng.gen_range(-5..=5))).collect())
        .collect();
    FiniteGame::new(k, utilities).unwrap()
}

/// A game built as u_i = P + d_i(a_{-i}), hence potential by construction.
fn random_potential_game(rng: &mut StdRng) -> (FiniteGame, Vec<Rat>) {
    let n = rng.gen_range(2..=3);
    let k: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let total: usize = k.iter().product();
    let p: Vec<Rat> = (0..total).map(|_| rat(rng.gen_range(-5..=5))).collect();
    let p_row = RatMatrix::row_from_vec(p.clone());
    let mut utilities = Vec::with_capacity(n);
    for i in 1..=n {
        let ei_t = e_matrix(i, &k).unwrap().transpose();
        let d: Vec<Rat> = (0..ei_t.rows())
            .map(|_| rat(rng.gen_range(-5..=5)))
            .collect();
        let lifted = RatMatrix::row_from_vec(d).mul(&ei_t).unwrap();
        utilities.push(p_row.add(&lifted).unwrap().row(0));
    }
    (FiniteGame::new(k, utilities).unwrap(), p)
}

#[test]
fn criterion_6_solver_vs_brute_force_oracle() {
    criterion(
        6,
        "potential-equation solvability agrees with the path-integration \
         oracle on 200 random games",
        || {
            let mut rng = StdRng::seed_from_u64(60_2026);
            let mut potential_count = 0;
            for case in 0..200 {
                // mix plain random games with potential-by-construction ones
                // so both verdicts are exercised
                let g = if case % 4 == 0 {
                    random_potential_game(&mut rng).0
                } else {
                    random_game(&mut rng)
                };
                let solver_says = is_potential(&g).is_some();
                let candidate = integrated_potential(&g);
                let oracle_says = verify_potential_def(&g, &candidate).unwrap();
                assert_eq!(solver_says, oracle_says, "case {case}");
                potential_count += usize::from(solver_says);
            }
            println!("criterion 6 potential games: {potential_count}/200");
            assert!(potential_count > 0 && potential_count < 200);
        },
    );
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> RatMatrix {
    let rows_data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-3..=3)).collect())
        .collect();
    let refs: Vec<&[i64]> = rows_data.iter().map(|r| r.as_slice()).collect();
    RatMatrix::from_int_rows(&refs)
}

fn random_stochastic(rng: &mut StdRng, dim: usize) -> Vec<Rat> {
    let weights: Vec<i64> = (0..dim).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    weights
        .iter()
        .map(|&w| Rat::new(w.into(), total.into()))
        .collect()
}

#[test]
fn criterion_7_property_suites() {
    criterion(
        7,
        "nine algebraic/dynamic property suites, >= 100 random instances each",
        || {
            let mut rng = StdRng::seed_from_u64(70_2026);

            // semi-tensor product associativity
            for _ in 0..100 {
                let dims: Vec<usize> = (0..6).map(|_| rng.gen_range(1..=3)).collect();
                let a = random_matrix(&mut rng, dims[0], dims[1]);
                let b = random_matrix(&mut rng, dims[2], dims[3]);
                let c = random_matrix(&mut rng, dims[4], dims[5]);
                assert_eq!(stp(&stp(&a, &b), &c), stp(&a, &stp(&b, &c)));
            }

            // vector pseudo-commutation: Z |x A = (I_t (x) A) |x Z for a
            // column Z, and A |x Z = Z |x (I_t (x) A) for a row Z
            for _ in 0..100 {
                let t = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=3);
                let n = rng.gen_range(1..=3);
                let a = random_matrix(&mut rng, m, n);
                let it_a = RatMatrix::identity(t).kron(&a);
                let z_col = random_matrix(&mut rng, t, 1);
                assert_eq!(stp(&z_col, &a), stp(&it_a, &z_col));
                let z_row = random_matrix(&mut rng, 1, t);
                assert_eq!(stp(&a, &z_row), stp(&z_row, &it_a));
            }

            // swap matrix orthogonality: W_{[m,n]}^T = W_{[m,n]}^{-1} = W_{[n,m]}
            for _ in 0..100 {
                let m = rng.gen_range(1..=5);
                let n = rng.gen_range(1..=5);
                let w = swap_matrix(m, n).to_matrix();
                let w_rev = swap_matrix(n, m).to_matrix();
                assert_eq!(w.transpose(), w_rev);
                assert_eq!(w.mul(&w_rev).unwrap(), RatMatrix::identity(m * n));
            }

            // swap matrix exchanges factors, column and row form
            for _ in 0..100 {
                let m = rng.gen_range(1..=3);
                let n = rng.gen_range(1..=3);
                let w = swap_matrix(m, n).to_matrix();
                let x = random_matrix(&mut rng, m, 1);
                let y = random_matrix(&mut rng, n, 1);
                assert_eq!(stp(&stp(&w, &x), &y), stp(&y, &x));
                let xr = random_matrix(&mut rng, 1, m);
                let yr = random_matrix(&mut rng, 1, n);
                assert_eq!(stp(&stp(&xr, &yr), &w), stp(&yr, &xr));
            }

            // drawing matrix projects profiles, pure and stochastic alike
            for _ in 0..100 {
                let n = rng.gen_range(2..=4);
                let k: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
                let u: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
                let u = if u.is_empty() { vec![1] } else { u };
                let gamma = drawing_matrix(&u, &k).unwrap();
                // pure profile
                let deltas: Vec<DeltaVector> = k
                    .iter()
                    .map(|&ki| DeltaVector {
                        dim: ki,
                        index: rng.gen_range(1..=ki),
                    })
                    .collect();
                let full = delta_product(&deltas).unwrap().to_column();
                let sub: Vec<DeltaVector> =
                    u.iter().map(|&i| deltas[i - 1].clone()).collect();
                assert_eq!(
                    gamma.mul(&full).unwrap(),
                    delta_product(&sub).unwrap().to_column()
                );
                // stochastic (mixed) profile
                let mixed: Vec<RatMatrix> = k
                    .iter()
                    .map(|&ki| RatMatrix::col_from_vec(random_stochastic(&mut rng, ki)))
                    .collect();
                let mut full = mixed[0].clone();
                for x in &mixed[1..] {
                    full = full.kron(x);
                }
                let mut want = mixed[u[0] - 1].clone();
                for &i in &u[1..] {
                    want = want.kron(&mixed[i - 1]);
                }
                assert_eq!(gamma.mul(&full).unwrap(), want);
            }

            // two potentials of one game differ by a constant
            for _ in 0..100 {
                let (g, p) = random_potential_game(&mut rng);
                let cert = is_potential(&g).expect("potential by construction");
                let diff0 = &cert.v_p[0] - &p[0];
                for (a, b) in cert.v_p.iter().zip(&p) {
                    assert_eq!(a - b, diff0);
                }
            }

            // every SEP-built state process is objective-monotone
            for _ in 0..100 {
                let r = rng.gen_range(1..=3);
                let n = rng.gen_range(2..=3);
                let k = vec![2usize; n];
                let total = 1usize << n;
                let blocks: Vec<Vec<Rat>> = (0..r)
                    .map(|_| (0..total).map(|_| rat(rng.gen_range(-5..=5))).collect())
                    .collect();
                let phi = ObjectiveFunction::state_based(blocks).unwrap();
                for sep in [Sep::Sep1, Sep::Sep2] {
                    let mp = build_mp(&phi, &k, sep).unwrap();
                    for x in 1..=r {
                        for a in StrategyProfile::all(&k) {
                            let here = phi.eval(Some(x), &a, &k).unwrap();
                            let col = (x - 1) * total + a.index(&k) - 1;
                            for y in 1..=r {
                                if !mp.matrix()[(y - 1, col)].is_zero() {
                                    assert!(phi.eval(Some(y), &a, &k).unwrap() >= here);
                                }
                            }
                        }
                    }
                }
            }

            // sequential best-response play never decreases the potential
            for case in 0..100 {
                let (g, p) = random_potential_game(&mut rng);
                let a0 = StrategyProfile::from_index(
                    rng.gen_range(1..=g.profile_count()),
                    g.k(),
                );
                let config = SurConfig {
                    cadence: Cadence::RoundRobin,
                    info: InfoMode::Global,
                    seed: case,
                };
                let objective = ObjectiveFunction::fixed(p);
                let trace = simulate(&g, Some(&objective), &config, None, a0, 40).unwrap();
                for pair in trace.steps.windows(2) {
                    assert!(pair[1].phi >= pair[0].phi, "potential dropped");
                }
            }

            // a profile is a fixed point of the dynamics iff it is Nash
            for _ in 0..100 {
                let g = random_game(&mut rng);
                for a in StrategyProfile::all(g.k()) {
                    assert_eq!(
                        is_fixed_point(&g, &a, InfoMode::Global, None).unwrap(),
                        g.is_nash(&a)
                    );
                }
            }
        },
    );
}
