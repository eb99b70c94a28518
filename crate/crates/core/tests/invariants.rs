//! Property tests for the geometric and probabilistic invariants.

use proptest::prelude::*;

use planchette_core::alphabet::Alphabet;
use planchette_core::board::{BoardLayout, Bounds, Position};
use planchette_core::energy::{elemental_gradient, PotentialParams};
use planchette_core::lm::{perplexity, CharModel, NgramModel, TrainMode, Vocabulary};
use planchette_core::oracle::Grid;
use planchette_core::Symbol;

fn small_vocab() -> Vocabulary {
    Vocabulary::new(vec![
        ("rose".into(), 0.9),
        ("rockrose".into(), 0.2),
        ("iris".into(), 0.5),
        ("ixora".into(), 0.8),
        ("peony".into(), 0.7),
    ])
    .unwrap()
}

proptest! {
    #[test]
    fn clip_is_idempotent(x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let board = BoardLayout::default_latin();
        let once = board.clip(Position::new(x, y));
        prop_assert_eq!(board.clip(once), once);
        prop_assert!(board.bounds().contains(once));
    }

    #[test]
    fn nearest_goal_is_translation_invariant(
        x in -1.0f64..7.0,
        y in -1.0f64..4.0,
        dx in -3.0f64..3.0,
        dy in -3.0f64..3.0,
    ) {
        let board = BoardLayout::default_latin();
        let shifted_goals = board
            .goals()
            .iter()
            .map(|g| Position::new(g.x + dx, g.y + dy))
            .collect::<Vec<_>>();
        let shifted_bounds = Bounds::new(
            board.bounds().x_min + dx.min(0.0) - 1.0,
            board.bounds().x_max + dx.max(0.0) + 1.0,
            board.bounds().y_min + dy.min(0.0) - 1.0,
            board.bounds().y_max + dy.max(0.0) + 1.0,
        )
        .unwrap();
        let shifted =
            BoardLayout::new(board.alphabet().clone(), shifted_goals, shifted_bounds).unwrap();
        let p = Position::new(x, y);
        let q = Position::new(x + dx, y + dy);
        prop_assert_eq!(board.nearest_goal(p), shifted.nearest_goal(q));
    }

    #[test]
    fn per_goal_force_norm_is_bounded(
        x in -20.0f64..20.0,
        y in -20.0f64..20.0,
        r0 in 0.05f64..2.0,
    ) {
        let params = PotentialParams::new(r0, 0.0).unwrap();
        let g = elemental_gradient(Position::new(x, y), Position::new(0.0, 0.0), &params);
        prop_assert!(g.norm() <= 1.0 / (2.0 * r0) + 1e-12);
    }

    #[test]
    fn next_char_dist_is_normalized_everywhere(
        seed_ctx in proptest::collection::vec(0u8..28, 0..8),
        alpha in prop_oneof![Just(0.0), Just(1e-3), Just(0.5)],
    ) {
        let model = NgramModel::train_weighted(
            &small_vocab(),
            &Alphabet::latin(),
            3,
            alpha,
            TrainMode::Expectation,
        )
        .unwrap();
        let context: Vec<Symbol> = seed_ctx.into_iter().map(Symbol).collect();
        let dist = model.next_char_dist(&context);
        let sum: f64 = dist.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {}", sum);
        prop_assert_eq!(dist[model.alphabet().bos().index()], 0.0);
        if alpha > 0.0 {
            for (i, &p) in dist.iter().enumerate() {
                if Symbol(i as u8) != model.alphabet().bos() {
                    prop_assert!(p > 0.0);
                }
            }
        }
    }

    #[test]
    fn voronoi_masses_are_a_distribution(weights in proptest::collection::vec(0.01f64..1.0, 40)) {
        let board = BoardLayout::default_latin();
        let mut grid = Grid::covering(board.bounds(), 0.25).unwrap();
        let n = grid.values().len();
        let total: f64 = weights.iter().cycle().take(n).sum();
        for (i, v) in grid.values_mut().iter_mut().enumerate() {
            *v = weights[i % weights.len()] / total;
        }
        let masses = board.voronoi_cell_mass(&grid).unwrap();
        let sum: f64 = masses.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-6);
        prop_assert!(masses.iter().all(|&m| m >= 0.0));
    }
}

/// Spec-level normalization sweep: 1000 random contexts.
#[test]
fn thousand_random_contexts_stay_normalized() {
    use rand::{Rng, SeedableRng};
    let model = NgramModel::train_weighted(
        &small_vocab(),
        &Alphabet::latin(),
        6,
        1e-3,
        TrainMode::Expectation,
    )
    .unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let len = rng.gen_range(0..10);
        let context: Vec<Symbol> =
            (0..len).map(|_| Symbol(rng.gen_range(0..28) as u8)).collect();
        let sum: f64 = model.next_char_dist(&context).iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

/// A deterministic corpus evaluates itself at perplexity exactly 1.
#[test]
fn self_perplexity_of_deterministic_corpus_is_one() {
    let vocab = Vocabulary::new(vec![("quince".into(), 1.0)]).unwrap();
    let model =
        NgramModel::train_weighted(&vocab, &Alphabet::latin(), 6, 0.0, TrainMode::Expectation)
            .unwrap();
    let ppl = perplexity(&model, &["quince".to_string()]).unwrap();
    assert!((ppl - 1.0).abs() < 1e-12);
}

/// Three collinear equispaced goals under a uniform density split the box
/// into thirds (middle region exactly one third of the width).
#[test]
fn collinear_goals_take_analytic_voronoi_shares() {
    let alphabet = Alphabet::from_labels(&["BOS", "a", "EOS"]).unwrap();
    let board = BoardLayout::new(
        alphabet,
        vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0), Position::new(2.0, 0.0)],
        Bounds::new(-0.5, 2.5, -0.5, 0.5).unwrap(),
    )
    .unwrap();
    let mut grid = Grid::covering(board.bounds(), 0.02).unwrap();
    let n = grid.values().len() as f64;
    grid.values_mut().iter_mut().for_each(|v| *v = 1.0 / n);
    let masses = board.voronoi_cell_mass(&grid).unwrap();
    for (i, &mass) in masses.iter().enumerate() {
        assert!((mass - 1.0 / 3.0).abs() < 0.02, "goal {i} mass {mass}");
    }
}

/// All the mass in a single grid cell lands on that cell's nearest symbol.
#[test]
fn point_density_maps_to_one_symbol() {
    let board = BoardLayout::default_latin();
    let mut grid = Grid::covering(board.bounds(), 0.1).unwrap();
    let target = Position::new(5.03, 2.08); // cell center (5.05, 2.05), inside 's' region
    let bin = grid.bin(target);
    grid.values_mut()[bin] = 1.0;
    let masses = board.voronoi_cell_mass(&grid).unwrap();
    let s = board.alphabet().from_letter('s').unwrap();
    assert_eq!(masses[s.index()], 1.0);
}
