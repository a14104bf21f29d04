use easense::metrics::{score_archive, Metric, ReferenceData};
use easense::moo::{run_moead, DecompositionMode, MoeadConfig};
use easense::problems::Problem;
use easense::util::median;

fn median_igd(mode: DecompositionMode) -> f64 {
    let p = Problem::by_id("dtlz3_m3_n10").unwrap();
    let reference = ReferenceData::for_problem(&p).unwrap();
    let cfg = MoeadConfig { mode, ..MoeadConfig::default() };
    let igd: Vec<f64> = (0..5)
        .map(|s| {
            let run = run_moead(&p, &cfg, 10_000, s).unwrap();
            score_archive(&run.archive, Metric::Igd, &reference).unwrap().value
        })
        .collect();
    median(&igd)
}

#[test]
fn normalized_tchebycheff_beats_raw_on_badly_scaled_problem() {
    let raw = median_igd(DecompositionMode::Tchebycheff);
    let normalized = median_igd(DecompositionMode::TchebycheffNormalized);
    println!("dtlz3 median IGD: raw {raw:.4e}, normalized {normalized:.4e}");
    assert!(normalized < raw);
}
