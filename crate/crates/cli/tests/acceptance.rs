//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Criteria cover the
//! analytic gradients, the moment and stationarity identities of the
//! collective chain, the character-level product-of-experts factorization,
//! and the behavioral properties of the generation pipeline.

use std::collections::HashMap;
use std::time::Instant;

use planchette_cli::config::ExperimentConfig;
use planchette_cli::experiment::{
    ablation_sweep, perplexity_matrix, Condition, Experiment,
};
use planchette_cli::export;
use planchette_core::alphabet::Alphabet;
use planchette_core::board::{BoardLayout, Bounds, Position};
use planchette_core::dynamics::{
    collective_increment, d_fused, select_character, t_fused, AgentSpec, Drive, DynamicsConfig,
};
use planchette_core::energy::{EnergyContext, Vec2};
use planchette_core::lm::{CharModel, NgramModel};
use planchette_core::oracle::{
    char_mass_oracle, empirical_histogram, gibbs_oracle, poe_char_check, total_variation,
    CharDistribution,
};
use planchette_core::rng::StreamBundle;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id} ({name}): {verdict} - {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn default_experiment(seed: u64) -> Experiment {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = seed;
    Experiment::from_config(&cfg).expect("default experiment builds")
}

/// Criterion 1: analytic gradients match central finite differences
/// (h = 1e-5) with relative error below 1e-6 at 1000 random positions.
#[test]
fn criterion_1_gradient_oracle() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let experiment = default_experiment(0);
    let board = &experiment.board;
    let dists: Vec<Vec<f64>> =
        experiment.agents.iter().map(|a| a.model.next_char_dist(&[])).collect();
    let ctx = EnergyContext::new(board, &dists, experiment.dynamics.params).unwrap();

    let h = 1e-5;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let bounds = board.bounds();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Position::new(
            rng.gen_range(bounds.x_min..bounds.x_max),
            rng.gen_range(bounds.y_min..bounds.y_max),
        );
        let fd_of = |f: &dyn Fn(Position) -> f64| {
            Vec2::new(
                (f(Position::new(p.x + h, p.y)) - f(Position::new(p.x - h, p.y))) / (2.0 * h),
                (f(Position::new(p.x, p.y + h)) - f(Position::new(p.x, p.y - h))) / (2.0 * h),
            )
        };
        // Per-agent effective energies and the fused sum.
        for (i, dist) in dists.iter().enumerate() {
            let analytic = ctx.agent_gradients(p)[i];
            let fd = fd_of(&|q| {
                planchette_core::energy::effective_energy(q, dist, board, &ctx.params())
            });
            worst = worst.max((analytic - fd).norm() / (1.0 + fd.norm()));
        }
        let analytic = ctx.fused_gradient(p);
        let fd = fd_of(&|q| ctx.fused_energy(q));
        worst = worst.max((analytic - fd).norm() / (1.0 + fd.norm()));
    }
    report(
        1,
        "gradient oracle",
        worst < 1e-6,
        &format!("max relative error {worst:.3e} over 1000 positions [{:.2?}]", start.elapsed()),
    );
}

/// Criterion 2: at 20 fixed positions the one-step increment of the
/// decentralized dynamics has mean within 3 sigma of `-eta grad(E_fused)`
/// and covariance within 5% of `2 sum(D_i) I` over 1e5 draws per position.
#[test]
fn criterion_2_moment_identity() {
    let start = Instant::now();
    let experiment = default_experiment(0);
    let board = &experiment.board;
    let cfg = &experiment.dynamics;
    let agents = &experiment.agents;
    let dists: Vec<Vec<f64>> = agents.iter().map(|a| a.model.next_char_dist(&[])).collect();
    let ctx = EnergyContext::new(board, &dists, cfg.params).unwrap();
    let sigma = 2.0 * d_fused(agents);

    let n = 100_000usize;
    let mut worst_mean = 0.0f64;
    let mut worst_cov = 0.0f64;
    let mut position_index = 0;
    for ix in 0..5 {
        for iy in 0..4 {
            let p = Position::new(ix as f64 * 1.5, iy as f64);
            let drift = ctx.fused_gradient(p) * -cfg.eta;
            let mut streams = StreamBundle::new(1000 + position_index, agents.len());
            position_index += 1;
            let drives: Vec<Drive> = dists.iter().map(|d| Drive::Marginal(d)).collect();
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for _ in 0..n {
                let inc = collective_increment(agents, p, &drives, board, cfg, &mut streams);
                sx += inc.x;
                sy += inc.y;
                sxx += inc.x * inc.x;
                syy += inc.y * inc.y;
                sxy += inc.x * inc.y;
            }
            let nf = n as f64;
            let (mx, my) = (sx / nf, sy / nf);
            let se = (sigma / nf).sqrt();
            worst_mean = worst_mean
                .max((mx - drift.x).abs() / (3.0 * se))
                .max((my - drift.y).abs() / (3.0 * se));
            let cxx = sxx / nf - mx * mx;
            let cyy = syy / nf - my * my;
            let cxy = sxy / nf - mx * my;
            worst_cov = worst_cov
                .max((cxx - sigma).abs() / (0.05 * sigma))
                .max((cyy - sigma).abs() / (0.05 * sigma))
                .max(cxy.abs() / (0.05 * sigma));
        }
    }
    report(
        2,
        "moment identity",
        worst_mean <= 1.0 && worst_cov <= 1.0,
        &format!(
            "worst mean deviation {worst_mean:.2} x 3sigma, worst covariance deviation \
             {worst_cov:.2} x 5% over 20 positions [{:.2?}]",
            start.elapsed()
        ),
    );
}

/// Criterion 3: a 2e5-step empirical histogram (burn-in 1e4, grid 0.1) of
/// the collective chain on the default board at a fixed context stays
/// within total variation 0.05 of the Gibbs oracle at the fused
/// temperature 0.2.
#[test]
fn criterion_3_stationarity() {
    let start = Instant::now();
    let experiment = default_experiment(10);
    let board = &experiment.board;
    let agents = &experiment.agents;
    let cfg = &experiment.dynamics;
    let temperature = t_fused(agents, cfg.eta);
    assert!((temperature - 0.2).abs() < 1e-12);

    let dists: Vec<Vec<f64>> = agents.iter().map(|a| a.model.next_char_dist(&[])).collect();
    let ctx = EnergyContext::new(board, &dists, cfg.params).unwrap();
    let histogram =
        empirical_histogram(agents, &[], board, cfg, 200_000, 10_000, 0.1).unwrap();
    let oracle = gibbs_oracle(&ctx, temperature, 0.1).unwrap();
    let tv = total_variation(histogram.normalized().values(), oracle.probs()).unwrap();
    report(
        3,
        "stationarity",
        tv <= 0.05,
        &format!("TV(empirical, Gibbs) = {tv:.4} at T = {temperature} [{:.2?}]", start.elapsed()),
    );
}

/// Criterion 4: on a three-goal toy board with two hand-set agent
/// distributions and equal per-agent temperatures, the collective's
/// empirical selection frequencies stay within total variation 0.1 of the
/// normalized geometric mean of the two single-agent oracle character
/// masses.
#[test]
fn criterion_4_poe_characters() {
    let start = Instant::now();
    let alphabet = Alphabet::from_labels(&["BOS", "a", "EOS"]).unwrap();
    let board = BoardLayout::new(
        alphabet.clone(),
        vec![Position::new(1.0, 0.0), Position::new(0.0, 0.0), Position::new(2.0, 0.0)],
        Bounds::new(-1.0, 3.0, -1.0, 1.0).unwrap(),
    )
    .unwrap();
    let hand_set = |pa: f64, peos: f64| {
        let mut counts = HashMap::new();
        counts.insert(Vec::new(), vec![0.0, pa, peos]);
        NgramModel::from_counts(alphabet.clone(), 1, 0.0, counts).unwrap()
    };
    let cfg = DynamicsConfig::default();
    let t_i = 0.1;
    let d1 = vec![0.0, 0.8, 0.2];
    let d2 = vec![0.0, 0.3, 0.7];

    // Single-agent stationary character masses from the grid oracle.
    let solo1 = [d1.clone()];
    let solo2 = [d2.clone()];
    let mass1 = char_mass_oracle(&EnergyContext::new(&board, &solo1, cfg.params).unwrap(), t_i, 0.02)
        .unwrap();
    let mass2 = char_mass_oracle(&EnergyContext::new(&board, &solo2, cfg.params).unwrap(), t_i, 0.02)
        .unwrap();

    // 2000 collective inner-loop selections at D_i = T_i * eta.
    let agents = [
        AgentSpec::new(hand_set(0.8, 0.2), t_i * cfg.eta).unwrap(),
        AgentSpec::new(hand_set(0.3, 0.7), t_i * cfg.eta).unwrap(),
    ];
    let mut streams = StreamBundle::new(0, agents.len());
    let mut counts = vec![0u32; alphabet.len()];
    for _ in 0..2000 {
        let traj = select_character(&agents, &[], &board, &cfg, &mut streams).unwrap();
        counts[traj.selected.index()] += 1;
    }
    let empirical = CharDistribution::from_counts(alphabet, &counts).unwrap();
    let tv =
        poe_char_check(&[mass1.selection, mass2.selection], &[0.5, 0.5], &empirical).unwrap();
    report(
        4,
        "product-of-experts characters",
        tv <= 0.1,
        &format!(
            "TV(selection frequencies, tempered product) = {tv:.4} over 2000 selections \
             [{:.2?}]",
            start.elapsed()
        ),
    );
}

/// Criterion 5: with all noise off, 100 trials collapse to exactly one
/// distinct output word; at the default fused temperature 0.2 they spread
/// over at least five distinct words.
#[test]
fn criterion_5_noise_collapse_and_spread() {
    let start = Instant::now();
    let mut quiet = ExperimentConfig::default();
    quiet.seed = 0;
    for agent in &mut quiet.agents {
        agent.noise_d = 0.0;
    }
    let frozen = Experiment::from_config(&quiet).unwrap();
    let (collapsed, _) = frozen.run_trials(Condition::Collective).unwrap();

    let experiment = default_experiment(0);
    assert!((t_fused(&experiment.agents, experiment.dynamics.eta) - 0.2).abs() < 1e-12);
    let (spread, _) = experiment.run_trials(Condition::Collective).unwrap();

    report(
        5,
        "no-noise collapse",
        collapsed.distinct_words == 1 && spread.distinct_words >= 5,
        &format!(
            "noise-free: {} distinct ({:?} x {}); default temperature: {} distinct [{:.2?}]",
            collapsed.distinct_words,
            collapsed.rows[0].word,
            collapsed.rows[0].count,
            spread.distinct_words,
            start.elapsed()
        ),
    );
}

/// Criterion 6: each agent's valid generations score strictly lowest
/// perplexity under its own model among the three evaluators, and the
/// collective's score strictly lowest under the fused model.
#[test]
fn criterion_6_perplexity_pattern() {
    let start = Instant::now();
    let experiment = default_experiment(0);
    let mut words_by_condition = Vec::new();
    for condition in experiment.conditions() {
        let (summary, _) = experiment.run_trials(condition).unwrap();
        words_by_condition.push((condition.name(), experiment.valid_words(&summary)));
    }
    let fused = experiment.fused_model().unwrap();
    let mut evaluators: Vec<(String, &dyn CharModel)> = Vec::new();
    for (i, agent) in experiment.agents.iter().enumerate() {
        evaluators.push((format!("agent{}_lm", i + 1), &agent.model));
    }
    evaluators.push(("fused_lm".to_string(), &fused));
    let matrix = perplexity_matrix(&words_by_condition, &evaluators).unwrap();
    assert!(matrix.warnings.is_empty(), "{:?}", matrix.warnings);

    let get = |c: &str, e: &str| matrix.value(c, e).unwrap();
    let own1 = get("agent1", "agent1_lm");
    let own2 = get("agent2", "agent2_lm");
    let fused_collective = get("collective", "fused_lm");
    let agent1_ok =
        own1 < get("agent1", "agent2_lm") && own1 < get("agent1", "fused_lm");
    let agent2_ok =
        own2 < get("agent2", "agent1_lm") && own2 < get("agent2", "fused_lm");
    let collective_ok = fused_collective < get("collective", "agent1_lm")
        && fused_collective < get("collective", "agent2_lm");
    report(
        6,
        "perplexity matrix pattern",
        agent1_ok && agent2_ok && collective_ok,
        &format!(
            "agent1 row [{:.3} {:.3} {:.3}], agent2 row [{:.3} {:.3} {:.3}], collective row \
             [{:.3} {:.3} {:.3}] [{:.2?}]",
            own1,
            get("agent1", "agent2_lm"),
            get("agent1", "fused_lm"),
            get("agent2", "agent1_lm"),
            own2,
            get("agent2", "fused_lm"),
            get("collective", "agent1_lm"),
            get("collective", "agent2_lm"),
            fused_collective,
            start.elapsed()
        ),
    );
}

/// Criterion 7: sweeping the fused noise temperature over
/// {0, 0.2, 0.5, 1.0} (each agent at T/N), the valid-word count is
/// non-increasing and the word-distribution entropy non-decreasing, with at
/// most one tied adjacent pair; the hottest point must produce at least one
/// non-vocabulary output.
#[test]
fn criterion_7_ablation_trend() {
    let start = Instant::now();
    let experiment = default_experiment(0);
    let agent_count = experiment.agents.len() as f64;
    let fused_temperatures = [0.0, 0.2, 0.5, 1.0];
    let per_agent: Vec<f64> = fused_temperatures.iter().map(|t| t / agent_count).collect();
    let results = ablation_sweep(&experiment, &per_agent).unwrap();

    let valid: Vec<usize> = results.iter().map(|(p, _)| p.valid_trials).collect();
    let entropy: Vec<f64> = results.iter().map(|(p, _)| p.entropy).collect();
    let valid_ok = valid.windows(2).all(|w| w[1] <= w[0]);
    let entropy_ok = entropy.windows(2).all(|w| w[1] >= w[0]);
    let ties = valid.windows(2).filter(|w| w[1] == w[0]).count()
        + entropy.windows(2).filter(|w| w[1] == w[0]).count();

    // Rank correlation signs of the trade-off.
    let spearman = |xs: &[f64]| {
        let mut rank: Vec<usize> = (0..xs.len()).collect();
        rank.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
        let mut rho = 0.0;
        for (r, &i) in rank.iter().enumerate() {
            let d = r as f64 - i as f64;
            rho += d * d;
        }
        let n = xs.len() as f64;
        1.0 - 6.0 * rho / (n * (n * n - 1.0))
    };
    let valid_f: Vec<f64> = valid.iter().map(|&v| v as f64).collect();
    let reliability = spearman(&valid_f);
    let diversity = spearman(&entropy);

    let last = &results.last().unwrap().1;
    let has_invalid = last.rows.iter().any(|r| !r.valid);

    report(
        7,
        "noise ablation trend",
        valid_ok && entropy_ok && ties <= 1 && has_invalid && reliability < 0.0 && diversity > 0.0,
        &format!(
            "valid {valid:?}, entropy {:?}, spearman(valid)={reliability:.2}, \
             spearman(entropy)={diversity:.2}, invalid at hottest: {has_invalid} [{:.2?}]",
            entropy.iter().map(|e| (e * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            start.elapsed()
        ),
    );
}

/// Criterion 8: the mean colorfulness weight of the collective's valid
/// outputs lies within the closed interval spanned by the two single-agent
/// means.
#[test]
fn criterion_8_weight_betweenness() {
    let start = Instant::now();
    let experiment = default_experiment(0);
    let mut means = Vec::new();
    for condition in experiment.conditions() {
        let (summary, _) = experiment.run_trials(condition).unwrap();
        means.push(summary.mean_valid_weight.expect("condition produced valid words"));
    }
    let (agent1, agent2, collective) = (means[0], means[1], means[2]);
    let lo = agent1.min(agent2);
    let hi = agent1.max(agent2);
    report(
        8,
        "weight-density betweenness",
        (lo..=hi).contains(&collective),
        &format!(
            "agent means {agent1:.3} / {agent2:.3}, collective {collective:.3} [{:.2?}]",
            start.elapsed()
        ),
    );
}

/// Criterion 9: rerunning an experiment with the same seed reproduces
/// byte-identical exported tables and fields.
#[test]
fn criterion_9_deterministic_exports() {
    let start = Instant::now();
    let mut frequency = Vec::new();
    let mut generations = Vec::new();
    let mut fields = Vec::new();
    for _ in 0..2 {
        let experiment = default_experiment(0);
        let (summary, records) = experiment.run_trials(Condition::Collective).unwrap();
        frequency.push(export::frequency_csv(&summary));
        generations.push(export::generations_jsonl(&records, &experiment.board));

        let dists: Vec<Vec<f64>> =
            experiment.agents.iter().map(|a| a.model.next_char_dist(&[])).collect();
        let ctx =
            EnergyContext::new(&experiment.board, &dists, experiment.dynamics.params).unwrap();
        let histogram = empirical_histogram(
            &experiment.agents,
            &[],
            &experiment.board,
            &experiment.dynamics,
            20_000,
            1_000,
            0.1,
        )
        .unwrap();
        let normalized = histogram.normalized();
        fields.push(export::prob_field_csv(&ctx, &normalized, normalized.values()));
    }
    let pass = frequency[0] == frequency[1]
        && generations[0] == generations[1]
        && fields[0] == fields[1];
    report(
        9,
        "deterministic exports",
        pass,
        &format!(
            "frequency {} B, generations {} B, field {} B reproduced byte-identically [{:.2?}]",
            frequency[0].len(),
            generations[0].len(),
            fields[0].len(),
            start.elapsed()
        ),
    );
}
