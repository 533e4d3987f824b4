use std::path::Path;

use nlc_core::grid::{build_grid, Field};
use nlc_core::io::{
    export_field_vtk, field_to_vtk, parse_config, parse_field_vtk, read_field_vtk, run, RunConfig,
};
use nlc_core::landscape::LandscapeGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(text: &str, out: &Path) -> RunConfig {
    let mut c = parse_config(text, Path::new("test.toml")).unwrap();
    c.output = out.to_path_buf();
    c
}

#[test]
fn vtk_round_trip_is_exact() {
    let g = build_grid(9, 9, 0.75).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = Field::from_data(
        &g,
        (0..5 * g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.vtk");
    export_field_vtk(&f, &path).unwrap();
    let back = read_field_vtk(&path).unwrap();
    assert_eq!(back.grid().as_ref(), g.as_ref());
    assert_eq!(back.data(), f.data());
}

#[test]
fn truncated_vtk_is_a_parse_error() {
    let g = build_grid(5, 5, 1.0).unwrap();
    let text = field_to_vtk(&Field::zeros(&g), "t");
    let cut = &text[..text.len() / 3];
    let err = parse_field_vtk(cut, Path::new("cut.vtk")).unwrap_err();
    assert!(err.to_string().contains("cut.vtk"), "{err}");
}

#[test]
fn relax_run_writes_outputs_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "mode = \"relax\"\n[grid]\nnx = 7\nh = 1.0\n[model]\nlambda2 = 5.0\n",
        dir.path(),
    );
    let report = run(&cfg).unwrap();
    assert_eq!(report.states.len(), 1);
    let s = &report.states[0];
    assert_eq!(s.label, "WORS-WORS-WORS");
    for f in [
        "summary.json",
        "resolved_config.toml",
        "wors.vtk",
        "wors_trace.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let trace = std::fs::read_to_string(dir.path().join("wors_trace.csv")).unwrap();
    assert!(trace.starts_with("step,energy,E_LdG,E_bc,grad_norm,dt\n"));
    assert_eq!(trace.lines().count(), s.steps + 2);
    // the resolved config parses back to itself
    let text = std::fs::read_to_string(dir.path().join("resolved_config.toml")).unwrap();
    let again = parse_config(&text, Path::new("resolved_config.toml")).unwrap();
    assert_eq!(again.resolved().unwrap(), again);
}

#[test]
fn checkpoints_are_written_every_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "mode = \"relax\"\ncheckpoint_interval = 5\n[grid]\nnx = 5\nh = 1.0\n[model]\nlambda2 = 5.0\n",
        dir.path(),
    );
    let report = run(&cfg).unwrap();
    let n = std::fs::read_dir(dir.path().join("checkpoints"))
        .unwrap()
        .count();
    assert_eq!(n, report.states[0].steps / 5);
}

#[test]
fn resumed_sweep_matches_uninterrupted_sweep() {
    let text = "mode = \"sweep\"\n[grid]\nnx = 9\nh = 1.0\n[model]\nlambda2 = 5.0\n[[seeds]]\nkind = \"wors\"\n\
                [[seeds]]\nkind = \"random\"\nseed = 2\n[sweep]\nlambda2 = [5.0, 40.0]\nh = [0.5, 1.0]\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&config(text, a.path())).unwrap();
    run(&config(text, b.path())).unwrap();
    // interrupt after the first cell: drop the others and rerun
    for name in [
        "cell_000_001.json",
        "cell_001_000.json",
        "cell_001_001.json",
    ] {
        std::fs::remove_file(b.path().join("cells").join(name)).unwrap();
    }
    run(&config(text, b.path())).unwrap();
    for entry in std::fs::read_dir(a.path().join("cells")).unwrap() {
        let entry = entry.unwrap();
        let other = b.path().join("cells").join(entry.file_name());
        assert_eq!(
            std::fs::read(entry.path()).unwrap(),
            std::fs::read(&other).unwrap(),
            "{:?}",
            entry.file_name()
        );
    }
    assert_eq!(
        std::fs::read(a.path().join("phase_diagram.json")).unwrap(),
        std::fs::read(b.path().join("phase_diagram.json")).unwrap()
    );
}

#[test]
fn landscape_edges_decrease_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "mode = \"landscape\"\n[grid]\nnx = 7\nh = 1.0\n[model]\nlambda2 = 8.0\n[solver]\nk = 2\n[landscape]\ndepth = 2\n",
        dir.path(),
    );
    let report = run(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("graph.json")).unwrap();
    let g: LandscapeGraph = serde_json::from_str(&text).unwrap();
    g.validate().unwrap();
    assert_eq!(g.nodes.len(), report.landscape_nodes);
    // the index-2 WORS sits above index-1 saddles, which sit above minima
    let indices: std::collections::BTreeSet<usize> = g.nodes.iter().map(|n| n.index).collect();
    assert_eq!(indices.into_iter().collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(g.nodes.windows(2).all(|w| w[0].energy <= w[1].energy));
    for n in &g.nodes {
        let file = n.field_file.as_ref().expect("node field written");
        assert!(dir.path().join(file).exists());
    }
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "id",
        "energy",
        "index",
        "label",
        "lambda2",
        "h",
        "field_file",
    ] {
        assert!(
            json["nodes"]
                .as_array()
                .unwrap()
                .iter()
                .all(|n| n.get(key).is_some()),
            "nodes lack {key}"
        );
    }
}
