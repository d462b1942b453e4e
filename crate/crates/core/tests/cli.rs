//! End-to-end command-line tests: the full pipeline on a synthetic roll,
//! exit codes for the documented failure classes, and a complete
//! name -> state -> language round trip on a hand-written corpus.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_namestate"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_ok(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} exited with {:?}:\n{}",
        output.status.code(),
        stderr(output)
    );
}

fn assert_exists(root: &Path, name: &str) {
    assert!(root.join(name).exists(), "expected {name} to be written");
}

#[test]
fn full_pipeline_runs_and_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();

    let synth = cli(root, &["synth", "--out", "roll.csv", "--names", "60", "--seed", "42"]);
    assert_ok(&synth, "synth");
    assert_exists(root, "roll.csv");
    assert_exists(root, "roll.csv.manifest.json");

    let preprocess = cli(
        root,
        &["preprocess", "--input", "roll.csv", "--output", "clean.csv"],
    );
    assert_ok(&preprocess, "preprocess");
    assert!(stderr(&preprocess).contains("rows"), "preprocess reports counts");
    assert_exists(root, "clean.csv");
    assert_exists(root, "clean.csv.manifest.json");

    let stats = cli(
        root,
        &[
            "stats", "--input", "clean.csv", "--out-histograms", "hist.csv", "--out-names",
            "names.csv",
        ],
    );
    assert_ok(&stats, "stats");
    assert_exists(root, "hist.csv");
    assert_exists(root, "names.csv");
    assert_exists(root, "hist.csv.manifest.json");

    let train = cli(
        root,
        &[
            "train", "--input", "clean.csv", "--model", "rnn", "--hidden", "8", "--batch-size",
            "32", "--epochs", "2", "--seed", "9", "--out", "model.bin",
        ],
    );
    assert_ok(&train, "train");
    assert!(stdout(&train).contains("final mean loss"), "train reports loss");
    for artifact in [
        "model.bin",
        "model.metrics.csv",
        "model.ckpt",
        "model.split.csv",
        "model.bin.manifest.json",
    ] {
        assert_exists(root, artifact);
    }
    let manifest = fs::read_to_string(root.join("model.bin.manifest.json")).unwrap();
    assert!(
        manifest.contains("\"subcommand\": \"train\""),
        "manifest names its subcommand"
    );
    assert!(manifest.contains("config_digest"), "manifest records the config digest");

    let evaluate = cli(
        root,
        &[
            "evaluate", "--input", "clean.csv", "--model-file", "model.bin", "--out-dir", "eval",
        ],
    );
    assert_ok(&evaluate, "evaluate");
    assert!(stdout(&evaluate).contains("test_set: n="), "evaluate prints the full-set report");
    for artifact in [
        "eval/slices.csv",
        "eval/accuracy_by_slice.csv",
        "eval/accuracy_by_state.csv",
        "eval/popularity_plot.csv",
        "eval/gender_plot.csv",
        "eval/evaluate.manifest.json",
    ] {
        assert_exists(root, artifact);
    }

    let baseline = cli(
        root,
        &[
            "evaluate", "--input", "clean.csv", "--baseline", "majority", "--out-dir",
            "eval_majority",
        ],
    );
    assert_ok(&baseline, "evaluate --baseline majority");
    assert!(
        stdout(&baseline).contains("expected modal accuracy"),
        "majority baseline reports its record share"
    );

    for (figure, out) in [("popularity", "pop_plot.csv"), ("gender", "gender_plot.csv")] {
        let plot = cli(
            root,
            &[
                "plotdata", "--figure", figure, "--model-file", "model.bin", "--input",
                "clean.csv", "--out", out,
            ],
        );
        assert_ok(&plot, "plotdata");
        let text = fs::read_to_string(root.join(out)).unwrap();
        assert!(text.starts_with("x,y,smoothed\n"), "{figure} plot has the x,y,smoothed header");
        assert!(text.lines().count() > 2, "{figure} plot has data rows");
    }

    let predict = cli(
        root,
        &["predict", "--model-file", "model.bin", "--name", "kumar", "--top-k", "2"],
    );
    assert_ok(&predict, "predict");
    let lines: Vec<String> = stdout(&predict).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 2, "two ranked states for --top-k 2");
    assert!(lines.iter().all(|l| l.starts_with("state\t")));
    assert_exists(root, "predict.manifest.json");
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let unknown = cli(dir.path(), &["--bogus-flag"]);
    assert_eq!(unknown.status.code(), Some(1), "unknown flag is a usage error");

    let zero_threads = cli(dir.path(), &["--threads", "0", "synth", "--out", "x.csv"]);
    assert_eq!(zero_threads.status.code(), Some(1));
    assert!(stderr(&zero_threads).contains("--threads"));
}

#[test]
fn data_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();

    let missing = cli(
        root,
        &["preprocess", "--input", "no_such_file.csv", "--output", "out.csv"],
    );
    assert_eq!(missing.status.code(), Some(2), "unreadable input is a data error");

    fs::write(
        root.join("roll.csv"),
        "first_name,last_name,father_husband_name,sex,state\na,bcd,e fgh,F,Alpha\n",
    )
    .unwrap();
    let bad_column = cli(
        root,
        &[
            "preprocess", "--input", "roll.csv", "--output", "out.csv", "--col-state",
            "nonexistent",
        ],
    );
    assert_eq!(bad_column.status.code(), Some(2), "missing column is a data error");
    assert!(
        stderr(&bad_column).contains("nonexistent"),
        "the error names the missing column: {}",
        stderr(&bad_column)
    );
}

#[test]
fn exploding_training_exits_3() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    assert_ok(
        &cli(root, &["synth", "--out", "roll.csv", "--names", "20", "--seed", "3"]),
        "synth",
    );
    assert_ok(
        &cli(root, &["preprocess", "--input", "roll.csv", "--output", "clean.csv"]),
        "preprocess",
    );
    // An absurd learning rate saturates the weights to infinity on the first
    // step; the next batch's loss is non-finite and training aborts.
    let train = cli(
        root,
        &[
            "train", "--input", "clean.csv", "--model", "rnn", "--hidden", "16", "--batch-size",
            "8", "--learning-rate", "1e39", "--epochs", "2", "--out", "model.bin",
        ],
    );
    assert_eq!(train.status.code(), Some(3), "stderr: {}", stderr(&train));
    assert!(stderr(&train).contains("non-finite loss"));
}

#[test]
fn help_prints_usage_and_exits_0() {
    let dir = TempDir::new().unwrap();
    let help = cli(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("Usage"));

    let sub_help = cli(dir.path(), &["train", "--help"]);
    assert_eq!(sub_help.status.code(), Some(0));
    assert!(stdout(&sub_help).contains("--learning-rate"));
}

/// A hand-written corpus with two states, trained until memorized, then a
/// single name is pushed through states and on to languages.
#[test]
fn suffix_signal_maps_a_name_to_its_state_and_language() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();

    let mut roll = String::from("first_name,last_name,father_husband_name,sex,state\n");
    let punjab = ["dhingra", "khanna", "bajwa", "sodhi"];
    let delhi = ["mehta", "gupta", "verma", "bansal"];
    for (names, state) in [(punjab, "Punjab"), (delhi, "Delhi")] {
        for name in names {
            for (i, first) in ["arjun", "meera", "raj", "simran"].iter().enumerate() {
                let sex = if i % 2 == 0 { "M" } else { "F" };
                roll.push_str(&format!("{first},{name},mohan {name},{sex},{state}\n"));
            }
        }
    }
    fs::write(root.join("roll.csv"), roll).unwrap();
    fs::write(
        root.join("languages.csv"),
        "state,language,weight,source\nPunjab,Punjabi,1.0,handbook\nDelhi,Hindi,1.0,handbook\n",
    )
    .unwrap();

    assert_ok(
        &cli(
            root,
            &["preprocess", "--input", "roll.csv", "--output", "clean.csv", "--floor", "2"],
        ),
        "preprocess",
    );
    // --train-fraction 0.95 over 8 names puts every name on the train side
    // (the split takes the ceiling), so the model can memorize all of them.
    assert_ok(
        &cli(
            root,
            &[
                "train", "--input", "clean.csv", "--model", "gru", "--hidden", "16",
                "--batch-size", "4", "--learning-rate", "0.01", "--epochs", "150", "--seed", "5",
                "--train-fraction", "0.95", "--out", "model.bin",
            ],
        ),
        "train",
    );

    for (name, state, language) in [("dhingra", "Punjab", "Punjabi"), ("mehta", "Delhi", "Hindi")] {
        let predict = cli(
            root,
            &[
                "predict", "--model-file", "model.bin", "--name", name, "--top-k", "2",
                "--languages", "--table", "languages.csv",
            ],
        );
        assert_ok(&predict, "predict");
        let text = stdout(&predict);
        let first_state = text
            .lines()
            .find(|l| l.starts_with("state\t"))
            .unwrap_or_default()
            .to_string();
        assert!(
            first_state.starts_with(&format!("state\t{state}\t")),
            "{name}: top state line was {first_state:?}"
        );
        let first_language = text
            .lines()
            .find(|l| l.starts_with("language\t"))
            .unwrap_or_default()
            .to_string();
        assert!(
            first_language.starts_with(&format!("language\t{language}\t")),
            "{name}: top language line was {first_language:?}"
        );
    }
}
