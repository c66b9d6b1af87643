use std::fs;
use std::path::{Path, PathBuf};

use boostlab_cli::main_with;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("boostlab").chain(args.iter().copied()))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(header).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    w.flush().unwrap();
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

const MEXICAN: [&str; 23] = [
    "id", "sex", "patient_type", "entry_date", "date_symptoms", "date_died", "intubed", "pneumonia", "age",
    "pregnancy", "diabetes", "copd", "asthma", "inmsupr", "hypertension", "other_disease", "cardiovascular",
    "obesity", "renal_chronic", "tobacco", "contact_other_covid", "covid_res", "icu",
];

fn mexican_fixture(path: &Path, n: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            MEXICAN
                .iter()
                .map(|&c| match c {
                    "id" => format!("p{i:04}"),
                    "entry_date" | "date_symptoms" => format!("2020-05-{:02}", 1 + i % 28),
                    "date_died" => if i % 9 == 0 { "2020-06-01" } else { "9999-99-99" }.to_string(),
                    "age" => rng.gen_range(1..95).to_string(),
                    "covid_res" => [1, 2, 2, 1, 3][i % 5].to_string(),
                    "intubed" | "icu" => [1, 2, 97][rng.gen_range(0..3)].to_string(),
                    _ => rng.gen_range(1..3).to_string(),
                })
                .collect()
        })
        .collect();
    write_table(path, &MEXICAN, &rows);
}

fn education_fixture(path: &Path) {
    let educations = ["8th grade or less", "High school", "Some college", "Bachelor's or more"];
    let races = ["White", "Black", "Hispanic", "Asian", "AIAN", "NHPI"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut rows = Vec::new();
    for period in 0..3 {
        for (i, e) in educations.iter().enumerate() {
            for (j, r) in races.iter().enumerate() {
                let total = rng.gen_range(500..5000);
                let covid = (total as f64 * (0.05 + 0.02 * i as f64 + 0.01 * j as f64 + rng.gen_range(0.0..0.03))) as u32;
                rows.push(vec![
                    "2022-01-05".into(),
                    format!("2020-0{}-01", period + 1),
                    format!("2020-0{}-28", period + 1),
                    e.to_string(),
                    r.to_string(),
                    covid.to_string(),
                    total.to_string(),
                    String::new(),
                ]);
            }
        }
    }
    let header = [
        "Data as of", "Start Date", "End Date", "Education Level", "Race or Hispanic Origin",
        "COVID-19 Deaths", "Total Deaths", "Footnote",
    ];
    write_table(path, &header, &rows);
}

fn region_fixture(path: &Path, n: usize) -> Vec<String> {
    let recipe: Value = serde_json::from_str(include_str!("../recipes/region-health.json")).unwrap();
    let keep: Vec<String> = recipe["keep_columns"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let mut header = vec!["Jurisdiction".to_string(), "Week Ending Date".to_string()];
    header.push("All Cause".into());
    header.push("Natural Cause".into());
    header.extend(keep[2..].iter().cloned());
    header.push("flag_allcause".into());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let base: f64 = rng.gen_range(100.0..1000.0);
            let mut r = vec![["Northeast", "South", "West"][i % 3].to_string(), "2020-04-04".into()];
            for j in 0..keep.len() {
                let v = base * (0.1 + 0.05 * j as f64) + rng.gen_range(0.0..20.0);
                // some missing cells, as in the public file
                r.push(if (i + j) % 17 == 0 { String::new() } else { format!("{v:.0}") });
            }
            r.push(String::new());
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(path, &h, &rows);
    keep
}

fn vax_fixture(path: &Path) {
    let header = [
        "State", "Total-Cases", "State-Population", "COV-Boost", "One-Dose", "Full-Dose", "Mask-Usage",
        "Mask-Mandate", "Male", "Female", "Age-65", "Diabetes", "Obesity", "Heart-Disease",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<String>> = (0..24)
        .map(|i| {
            let pop: f64 = rng.gen_range(5e5..4e7);
            let boost: f64 = rng.gen_range(10.0..40.0);
            let cases = pop * (0.3 - boost / 200.0 + rng.gen_range(0.0..0.03));
            let mut r = vec![format!("S{i}"), format!("{cases:.0}"), format!("{pop:.0}"), format!("{boost:.2}")];
            for _ in 0..10 {
                r.push(format!("{:.2}", rng.gen_range(0.0..100.0)));
            }
            r
        })
        .collect();
    write_table(path, &header, &rows);
}

#[test]
fn bad_invocations_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_table(&data, &["x", "y"], &[vec!["1".into(), "2".into()], vec!["2".into(), "3".into()]]);
    assert_eq!(run(&["train", "--bogus"]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["recipe", "--recipe", "no-such-recipe", "--input", &s(&data), "--output-dir", &s(dir.path())]), 2);
    let model = s(&dir.path().join("m.json"));
    assert_eq!(run(&["train", "--input", &s(&data), "--target", "y", "--model", &model, "--learning-rate", "0"]), 2);
    assert_eq!(run(&["train", "--input", &s(&data), "--target", "y", "--model", &model, "--goss-a", "0.2"]), 2);
    assert_eq!(
        run(&["train", "--input", &s(&data), "--target", "y", "--model", &model, "--ordered-blocks", "2"]),
        2,
        "ordered boosting needs the oblivious grower"
    );
    assert_eq!(run(&["train", "--input", &s(&data), "--model", &model]), 2, "no target");
    assert_eq!(run(&["--version"]), 0);
}

#[test]
fn corrupt_or_foreign_models_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let rows: Vec<Vec<String>> = (0..30).map(|i| vec![i.to_string(), (i * i % 7).to_string()]).collect();
    write_table(&data, &["x", "y"], &rows);
    let model = dir.path().join("m.json");
    assert_eq!(run(&["train", "--input", &s(&data), "--target", "y", "--model", &s(&model), "--trees", "3"]), 0);
    let out = s(&dir.path().join("p.csv"));

    let text = fs::read_to_string(&model).unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, &text[..text.len() / 2]).unwrap();
    assert_eq!(run(&["predict", "--model", &s(&broken), "--input", &s(&data), "--output", &out]), 1);

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["format_version"] = Value::from(999);
    let future = dir.path().join("future.json");
    fs::write(&future, v.to_string()).unwrap();
    assert_eq!(run(&["predict", "--model", &s(&future), "--input", &s(&data), "--output", &out]), 1);
    assert_eq!(run(&["predict", "--model", &s(&dir.path().join("absent.json")), "--input", &s(&data), "--output", &out]), 1);
    assert_eq!(run(&["predict", "--model", &s(&model), "--input", &s(&data), "--output", &out]), 0);
}

#[test]
fn categorical_features_round_trip_through_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let rows: Vec<Vec<String>> = (0..60)
        .map(|i| {
            let c = ["red", "green", "blue"][i % 3];
            let y = if c == "blue" { 1 } else { 0 };
            vec![c.to_string(), (i % 10).to_string(), y.to_string()]
        })
        .collect();
    write_table(&data, &["colour", "n", "y"], &rows);
    let model = dir.path().join("m.json");
    let reports = dir.path().join("r");
    let code = run(&[
        "train", "--input", &s(&data), "--target", "y", "--model", &s(&model), "--loss", "logistic", "--trees", "20",
        "--min-child-hessian", "0", "--output-dir", &s(&reports),
    ]);
    assert_eq!(code, 0);
    let m = json(model.clone());
    assert!(m["feature_names"].as_array().unwrap().iter().any(|f| f == "colour=blue"));
    let out = dir.path().join("p.csv");
    assert_eq!(run(&["predict", "--model", &s(&model), "--input", &s(&data), "--output", &s(&out)]), 0);
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    for (i, rec) in rdr.records().enumerate() {
        let p: f64 = rec.unwrap()[2].parse().unwrap();
        assert_eq!(p > 0.5, i % 3 == 2, "row {i}: {p}");
    }
    let train = json(reports.join("train.json"));
    assert_eq!(train["result"]["train"]["accuracy"], 1.0);

    let imp = dir.path().join("imp");
    assert_eq!(run(&["importance", "--model", &s(&model), "--normalized", "--output-dir", &s(&imp)]), 0);
    let report = json(imp.join("importance.json"));
    assert_eq!(report["result"]["entries"][0]["name"], "colour=blue");
    assert_eq!(run(&["importance", "--model", &s(&model), "--trees", "99", "--output-dir", &s(&imp)]), 2);
}

#[test]
fn mexican_plan_runs_on_a_small_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mexican.csv");
    mexican_fixture(&data, 50);
    let out = dir.path().join("out");
    assert_eq!(run(&["recipe", "--recipe", "mexican-covid", "--input", &s(&data), "--output-dir", &s(&out)]), 0);
    let base = out.join("mexican-covid");

    let pre = json(base.join("preprocess.json"));
    assert_eq!(pre["result"]["output_shape"], serde_json::json!([40, 23]));
    assert_eq!(pre["result"]["shape_checks"][0]["ok"], false);

    let chi2 = json(base.join("chi2.json"));
    assert_eq!(chi2["metadata"]["recipe"], "mexican-covid");
    let tests = chi2["result"]["tests"].as_array().unwrap();
    assert_eq!(tests.len(), 17);
    for v in ["diabetes", "asthma", "cardiovascular", "hypertension", "renal-chronic", "tobacco"] {
        let t = tests.iter().find(|t| t["variable"] == v).unwrap();
        assert_eq!(t["against"], "cov-res");
        assert_eq!(t["table"]["total"], 40);
        assert!(t["test"]["p_value"].as_f64().is_some_and(|p| (0.0..=1.0).contains(&p)));
    }

    for (plan, counts, features) in [
        ("catboost-full", vec![10, 100, 1000], 17),
        ("catboost-conditions", vec![10, 100, 1000], 14),
        ("xgboost-conditions", vec![100], 14),
        ("lightgbm-conditions", vec![2000], 14),
    ] {
        let r = json(base.join(format!("{plan}.json")));
        let at: Vec<u64> = r["result"]["importance"].as_array().unwrap().iter().map(|a| a["n_trees"].as_u64().unwrap()).collect();
        assert_eq!(at, counts.iter().map(|&c| c as u64).collect::<Vec<_>>(), "{plan}");
        assert_eq!(r["result"]["features"].as_array().unwrap().len(), features, "{plan}");
        let model = json(base.join(format!("{plan}.model.json")));
        assert_eq!(model["loss"], "logistic");
        assert!(base.join(format!("{plan}.csv")).is_file());
    }
    let lgb = json(base.join("lightgbm-conditions.model.json"));
    assert_eq!(lgb["config"]["grower"], "leaf_wise");
    assert_eq!(lgb["config"]["max_depth"], 10);
    assert_eq!(json(base.join("catboost-full.model.json"))["config"]["grower"], "oblivious");

    let index = fs::read_to_string(base.join("report.csv")).unwrap();
    assert_eq!(index.lines().count(), 1 + 5);

    // strict mode turns the shape warning into a validation error
    let strict = dir.path().join("strict");
    assert_eq!(
        run(&["recipe", "--recipe", "mexican-covid", "--input", &s(&data), "--output-dir", &s(&strict), "--strict-shapes"]),
        2
    );
    assert!(!strict.join("mexican-covid").join("chi2.json").exists());
}

#[test]
fn education_plan_adds_the_ratio_and_runs_anova() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("education.csv");
    education_fixture(&data);
    let out = dir.path().join("out");
    assert_eq!(
        run(&["recipe", "--recipe", "education-covid", "--input", &s(&data), "--output-dir", &s(&out), "--strict-shapes"]),
        0
    );
    let base = out.join("education-covid");
    let pre = json(base.join("preprocess.json"));
    assert_eq!(pre["result"]["input_shape"], serde_json::json!([72, 8]));
    assert_eq!(pre["result"]["output_shape"], serde_json::json!([72, 9]));
    assert!(pre["result"]["columns"].as_array().unwrap().iter().any(|c| c == "CTDPercentage"));

    let two = json(base.join("anova-education-race.json"));
    let terms = two["result"]["terms"].as_array().unwrap();
    assert_eq!(terms[0]["name"], "Education");
    assert_eq!(terms[0]["dof"], 3);
    assert_eq!(terms[1]["name"], "Race");
    assert_eq!(terms[1]["dof"], 5);
    assert_eq!(two["result"]["residual"]["dof"], 72 - 1 - 3 - 5);

    let by_race = fs::read_to_string(base.join("summary-by-race.csv")).unwrap();
    assert_eq!(by_race.lines().next().unwrap(), "Race,count,mean,median,q1,q3,min,max");
    assert_eq!(by_race.lines().count(), 7);
    let both = json(base.join("summary-by-education-race.json"));
    assert_eq!(both["result"]["groups"].as_array().unwrap().len(), 24);
}

#[test]
fn region_plan_correlates_and_regresses() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("region.csv");
    let keep = region_fixture(&data, 160);
    let out = dir.path().join("out");
    assert_eq!(run(&["recipe", "--recipe", "region-health", "--input", &s(&data), "--output-dir", &s(&out)]), 0);
    let base = out.join("region-health");
    let pre = json(base.join("preprocess.json"));
    let (rows, cols) = (pre["result"]["output_shape"][0].as_u64().unwrap(), pre["result"]["output_shape"][1].as_u64().unwrap());
    assert_eq!(cols, 15);
    assert!(rows < 160 && rows > 0);

    let corr = json(base.join("correlation.json"));
    let labels: Vec<&str> = corr["result"]["labels"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert_eq!(labels, keep.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(fs::read_to_string(base.join("correlation.csv")).unwrap().lines().count(), 1 + 15 * 15);

    let reg = json(base.join("regression.json"));
    let (train_rows, test_rows) = (reg["result"]["train"]["rows"].as_u64().unwrap(), reg["result"]["test"]["rows"].as_u64().unwrap());
    assert_eq!(train_rows + test_rows, rows);
    assert_eq!(train_rows, (0.75 * rows as f64 + 0.5).floor() as u64);
    let features = reg["result"]["features"].as_array().unwrap();
    assert_eq!(features.len(), 13);
    assert!(!features.iter().any(|f| f.as_str().unwrap().contains("Multiple")));
    assert!(reg["result"]["test"]["rmse"].as_f64().unwrap() >= 0.0);
}

#[test]
fn vax_plan_derives_case_share() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("vax.csv");
    vax_fixture(&data);
    let out = dir.path().join("out");
    assert_eq!(run(&["recipe", "--recipe", "covid19-vax", "--input", &s(&data), "--output-dir", &s(&out), "--strict-shapes"]), 0);
    let corr = json(out.join("covid19-vax").join("correlation-vaccination.json"));
    let labels = corr["result"]["labels"].as_array().unwrap();
    assert_eq!(labels[3], "State-Cases-Percentage");
    // cases were generated to fall with boosters
    let r: f64 = corr["result"]["r"][0][3].as_str().map_or_else(|| corr["result"]["r"][0][3].as_f64().unwrap(), |t| t.parse().unwrap());
    assert!(r < 0.0, "{r}");
}

#[test]
fn recipe_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("region.csv");
    region_fixture(&data, 120);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(run(&["recipe", "--recipe", "region-health", "--input", &s(&data), "--output-dir", &s(out), "--seed", "4"]), 0);
    }
    let mut names: Vec<_> = fs::read_dir(a.join("region-health")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in &names {
        let (p, q) = (a.join("region-health").join(n), b.join("region-health").join(n));
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap(), "{}", p.display());
    }
    assert_eq!(json(a.join("region-health").join("regression.json"))["metadata"]["seed"], 4);

    // the report subcommand rebuilds the same index
    let before = fs::read(a.join("region-health").join("report.json")).unwrap();
    assert_eq!(run(&["report", "--output-dir", &s(&a), "--recipe", "region-health"]), 0);
    assert_eq!(fs::read(a.join("region-health").join("report.json")).unwrap(), before);
    assert_eq!(run(&["report", "--output-dir", &s(&dir.path().join("empty")), "--recipe", "region-health"]), 1);
}

#[test]
fn standalone_statistics_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let rows: Vec<Vec<String>> = (0..40)
        .map(|i| {
            let g = ["a", "b"][i % 2];
            let h = (i / 2 % 2).to_string();
            let y = if g == "a" { 1.0 } else { 3.0 } + (i % 5) as f64 * 0.1;
            vec![g.into(), h, format!("{y}"), format!("{}", i as f64 * 0.5)]
        })
        .collect();
    write_table(&data, &["g", "h", "y", "x"], &rows);
    let out = dir.path().join("out");
    let (d, o) = (s(&data), s(&out));
    assert_eq!(run(&["chi2", "--input", &d, "--variables", "g", "--against", "h", "--output-dir", &o]), 0);
    assert_eq!(run(&["anova", "--input", &d, "--response", "y", "--factors", "g,h", "--output-dir", &o]), 0);
    assert_eq!(run(&["corr", "--input", &d, "--output-dir", &o, "--name", "all"]), 0);
    assert_eq!(run(&["summary", "--input", &d, "--value", "y", "--by", "g", "--output-dir", &o]), 0);
    assert_eq!(run(&["ingest", "--input", &d, "--output-dir", &o]), 0);

    let chi = json(out.join("chi2.json"));
    assert_eq!(chi["result"]["tests"][0]["table"]["counts"], serde_json::json!([[10, 10], [10, 10]]));
    let anova = json(out.join("anova.json"));
    assert!(anova["metadata"].get("recipe").is_none());
    assert_eq!(anova["result"]["terms"][1]["name"], "h");
    let corr = fs::read_to_string(out.join("all.csv")).unwrap();
    assert!(corr.starts_with("row,column,r,r_squared,n\n"));
    assert!(corr.contains("\ny,y,1,1,40\n"));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().nth(1).unwrap(), "a,20,1.2,1.2,1.1,1.3,1,1.4");
    let ingest = json(out.join("ingest.json"));
    assert_eq!(ingest["result"]["summary"]["rows"], 40);
    assert!(out.join("dataset.csv").is_file());

    assert_eq!(run(&["anova", "--input", &d, "--response", "y", "--factors", "g,h,x", "--output-dir", &o]), 2);
    assert_eq!(run(&["chi2", "--input", &d, "--variables", "nope", "--against", "h", "--output-dir", &o]), 1);
}
