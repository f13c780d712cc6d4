use std::process::Command;

use sdg::{ManufacturedSolution, StandardCoefficient};
use sdg_cli::{observed_order, run_study, to_csv, to_json, to_markdown, StudyConfig, StudyReport};

fn sdg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdg"))
}

fn small(rho: StandardCoefficient) -> StudyConfig {
    StudyConfig {
        meshes: vec![2, 4],
        ..StudyConfig::standard(ManufacturedSolution::U1, rho)
    }
}

#[test]
fn csv_has_the_fixed_header_and_one_row_per_level() {
    let report = run_study(&small(StandardCoefficient::Rho1)).unwrap();
    let csv = to_csv(&report).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "coefficient,solution,k,N,h,err_u,order_u,err_ustar,order_ustar,iters"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("rho1,u1,1,2,0.5,"));
    // the first level has no order
    assert_eq!(rows[0].split(',').nth(6), Some(""));
}

#[test]
fn json_round_trips() {
    let report = run_study(&small(StandardCoefficient::Rho3)).unwrap();
    let back: StudyReport = serde_json::from_str(&to_json(&report).unwrap()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn single_level_study_has_empty_orders() {
    let config = StudyConfig {
        meshes: vec![4],
        ..small(StandardCoefficient::Rho2)
    };
    let report = run_study(&config).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(report.rows[0].order_u.is_none() && report.rows[0].order_ustar.is_none());
    assert!(to_markdown(&report).contains("| 1/4 |"));
}

#[test]
fn orders_match_recomputation_from_the_error_columns() {
    let config = StudyConfig {
        meshes: vec![2, 4, 8],
        ..small(StandardCoefficient::Rho4)
    };
    let report = run_study(&config).unwrap();
    for w in report.rows.windows(2) {
        let expected = (w[0].err_u / w[1].err_u).log2();
        assert!((w[1].order_u.unwrap() - expected).abs() < 1e-12);
        let expected = (w[0].err_ustar / w[1].err_ustar).log2();
        assert!((w[1].order_ustar.unwrap() - expected).abs() < 1e-12);
    }
    assert!((observed_order(0.5, 4.0, 0.25, 1.0) - 2.0).abs() < 1e-15);
}

#[test]
fn invalid_configs_are_rejected() {
    for meshes in [vec![], vec![0, 2], vec![4, 4], vec![8, 4]] {
        let config = StudyConfig {
            meshes,
            ..small(StandardCoefficient::Rho1)
        };
        assert!(run_study(&config).is_err());
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = sdg()
            .args([
                "--solution",
                "u2",
                "--rho",
                "rho2",
                "--meshes",
                "2,4,8",
                "--format",
                "csv",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let plot = std::fs::read_to_string(dir.path().join("a.csv.plot.dat")).unwrap();
    assert!(plot.starts_with("# h err_u err_ustar"));
    assert_eq!(plot.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let ok = sdg()
        .args(["--meshes", "2", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let report: StudyReport = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report.rows.len(), 1);

    let stalled = sdg()
        .args([
            "--solution",
            "u2",
            "--rho",
            "rho6",
            "--meshes",
            "4",
            "--max-iters",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(stalled.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&stalled.stderr).contains("did not converge"));

    for bad in [
        vec!["--rho", "rho9"],
        vec!["--meshes", "8,4"],
        vec!["--tol", "-1"],
        vec!["--format", "xml"],
    ] {
        let out = sdg().args(&bad).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "{bad:?}");
    }

    let threads = sdg()
        .args(["--meshes", "2"])
        .env("SDG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(3));
    assert_eq!(sdg().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn markdown_lists_the_table_columns() {
    let report = run_study(&small(StandardCoefficient::Rho1)).unwrap();
    let md = to_markdown(&report);
    assert!(md.contains(
        "| Mesh size | ||u - u_h|| | order | ||u - u*_h|| | order | Number of iterations |"
    ));
    assert_eq!(md.lines().filter(|l| l.starts_with("| 1/")).count(), 2);
}
