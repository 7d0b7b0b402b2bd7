//! Shared harness for the golden CLI suite: fixture files plus the
//! list of invocations whose stdout is pinned byte for byte.

use std::path::Path;
use std::process::Command;

pub fn write_fixtures(dir: &Path) {
    std::fs::write(
        dir.join("circle.bundle"),
        "level: 0\ndim: 2\n[cover]\nmain; 1,0\n[connection]\nmain; analytic; dtheta; level:0; 0.1\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("square.loop"),
        "main; 1.2,1.2\nmain; -1.2,1.2\nmain; -1.2,-1.2\nmain; 1.2,-1.2\nmain; 1.2,1.2\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("two_charts.bundle"),
        "level: 2\ndim: 2\n[cover]\nupper; 0,1\nlower; 0,-1\n[transitions]\nupper,lower; 1,0; level:2; 1,0,0,0\nupper,lower; -1,0; level:2; 1,0,0,0\n[connection]\nupper; analytic; zero\nlower; analytic; zero\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("xdy.bundle"),
        "level: 0\ndim: 2\n[cover]\nmain; 0,0\n[connection]\nmain; analytic; xdy\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("sinxdy.bundle"),
        "level: 0\ndim: 2\n[cover]\nmain; 0,0\n[connection]\nmain; analytic; sinxdy\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("three.complex"),
        "points: [a, b, c]\ndegree_cap: 2\nlevel: 3\n",
    )
    .unwrap();
}

/// (case name, argv) pairs; `@` marks fixture paths to resolve.
pub fn cases() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        (
            "algebra_mul_generators",
            vec!["algebra", "mul", "level:3; 0,1,0,0,0,0,0,0", "level:3; 0,0,1,0,0,0,0,0"],
        ),
        (
            "algebra_mul_generic",
            vec!["algebra", "mul", "level:2; 0.5,-1.25,2,0.125", "level:2; 1,0.5,-0.75,2"],
        ),
        (
            "algebra_inv",
            vec!["algebra", "inv", "level:3; 1,2,-0.5,0.25,0,1,-1,0.5"],
        ),
        ("algebra_exp", vec!["algebra", "exp", "level:2; 0.3,0.4,-0.2,0.1"]),
        ("algebra_ln", vec!["algebra", "ln", "level:2; 0.8,0.6,0,0"]),
        ("algebra_conj", vec!["algebra", "conj", "level:3; 1,2,3,4,5,6,7,8"]),
        ("algebra_split", vec!["algebra", "split", "level:2; 1.5,-2,0.25,3"]),
        (
            "algebra_kdefect",
            vec![
                "algebra",
                "kdefect",
                "level:3; 0,0.4,0.3,0,0.2,0,0,0",
                "level:3; 0,0,0.5,0.1,0,0.3,0,0",
            ],
        ),
        (
            "bar_mul",
            vec![
                "bar",
                "mul",
                "A ; 2 ; [0.25] ; (1:2) ; (2:0.5)",
                "A ; 2 ; [0.5] ; (0:1) ; (3:2)",
            ],
        ),
        (
            "bar_inverse",
            vec!["bar", "inverse", "A ; 2 ; [0.25,0.5] ; (1:2) ; (2:0.5),(3:4)"],
        ),
        (
            "bar_normalize",
            vec!["bar", "normalize", "B ; 3 ; [0.5,0.25] ;  ; (5:-2),(6:0.5)"],
        ),
        (
            "bar_project",
            vec!["bar", "project", "A ; 2 ; [0.25] ; (1:-2) ; (2:0.5)"],
        ),
        (
            "forms_a",
            vec!["forms", "--side", "a", "--level", "2", "--max-degree", "3", "--samples", "2", "--seed", "7"],
        ),
        (
            "forms_b",
            vec!["forms", "--side", "b", "--level", "3", "--max-degree", "3", "--samples", "2", "--seed", "3"],
        ),
        (
            "holonomy_square",
            vec!["holonomy", "--bundle", "@circle.bundle", "--loop", "@square.loop", "--samples", "20000"],
        ),
        (
            "holonomy_defects",
            vec!["holonomy", "--bundle", "@two_charts.bundle", "--defects"],
        ),
        (
            "curvature_xdy",
            vec![
                "curvature", "--bundle", "@xdy.bundle", "--point", "0.2,0.3", "--axes", "0,1",
                "--scale", "0.01",
            ],
        ),
        (
            "curvature_richardson",
            vec![
                "curvature", "--bundle", "@sinxdy.bundle", "--point", "0.3,0.2", "--axes", "0,1",
                "--scale", "0.02", "--richardson",
            ],
        ),
        ("cohomology_three", vec!["cohomology", "--complex", "@three.complex"]),
        (
            "verify_moufang",
            vec!["verify", "--suite", "moufang", "--seed", "42", "--samples", "300"],
        ),
        (
            "verify_expln",
            vec!["verify", "--suite", "expln", "--seed", "7", "--samples", "200"],
        ),
        (
            "verify_kdefect",
            vec!["verify", "--suite", "kdefect", "--seed", "9", "--samples", "100"],
        ),
        (
            "verify_decompose",
            vec!["verify", "--suite", "decompose", "--seed", "3", "--samples", "200"],
        ),
        (
            "verify_bar",
            vec!["verify", "--suite", "bar", "--seed", "1", "--samples", "150"],
        ),
        (
            "verify_simplicial",
            vec!["verify", "--suite", "simplicial", "--seed", "5", "--samples", "40"],
        ),
        (
            "verify_twisted",
            vec!["verify", "--suite", "twisted", "--seed", "11", "--samples", "200"],
        ),
    ]
}

/// Runs one case against the built binary; returns (exit code, stdout).
pub fn run_case(fixture_dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let resolved: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(name) => fixture_dir.join(name).to_str().unwrap().to_string(),
            None => a.to_string(),
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_cayley-wrap"))
        .args(&resolved)
        .env_remove("CAYLEY_WRAP_CONFIG")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}
