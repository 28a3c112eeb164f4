use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.toml"))
}

fn eqmorse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqmorse")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = eqmorse(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn bredon_on_the_point_reads_off_g_mod_g() {
    let out = run_ok(&["bredon", &path("point")]);
    assert!(out.starts_with("# eqmorse bredon fixture=point ring=Z format=text\n"));
    for kind in ["singular", "constant", "quotient"] {
        assert!(out.contains(&format!("{kind:<20} H0 = Z\n")), "{out}");
    }
    // the single point is fixed
    assert!(out.contains("fixed                H0 = Z\n"));
}

#[test]
fn bredon_csv_over_a_prime() {
    let out = run_ok(&["bredon", &path("antipodal_circle"), "--p", "2", "--coeff", "singular", "--format", "csv"]);
    assert_eq!(
        out,
        "# eqmorse bredon fixture=antipodal_circle ring=F2 format=csv\nsystem,degree,rank,torsion\nsingular,0,1,\nsingular,1,1,\n"
    );
}

#[test]
fn morse_stabilize_on_the_rotation_figure() {
    let out = run_ok(&["morse", &path("figure1"), "--stabilize"]);
    assert!(out.starts_with("# eqmorse morse fixture=figure1 seeds=9 delta=0.05 stabilize=true ring=F2 format=text\n"));
    assert!(out.contains("before: 1 critical points\n"));
    assert!(out.contains("before  [0.000000 0.000000] value 0.000000 index 2 |stab| 3 unstable\n"));
    assert!(out.contains("after: 7 critical points\n"));
    assert!(out.contains("after   [0.000000 0.000000] value 0.000000 index 0 |stab| 3 stable\n"));
    assert_eq!(out.matches("|stab| 1 stable").count(), 6);
    assert!(out.contains("orbits: 1(index 0) 3(index 1) 3(index 2)\n"));
}

#[test]
fn unstable_points_fail_without_stabilize() {
    let out = eqmorse(&["morse", &path("circle_height")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rerun with --stabilize"));
}

#[test]
fn stabilized_circle_homology() {
    let out = run_ok(&["morse", &path("circle_height"), "--stabilize", "--format", "csv"]);
    assert!(out.contains("singular,0,1,\nsingular,1,1,\n"));
    assert!(out.contains("constant,0,1,\nconstant,1,0,\n"));
    assert!(out.contains("fixed,0,2,\nfixed,1,0,\n"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["morse", &path("torus_height")];
    let args: Vec<&str> = args.iter().map(|s| s.as_ref()).collect();
    assert_eq!(run_ok(&args), run_ok(&args));
}

#[test]
fn cells_reproduce_the_c2_table() {
    let out = run_ok(&["cells", "--k", "2"]);
    let expected = "\
# eqmorse cells fixture=C2 k=2 format=text
interior  singular: Z^2 in degree 2 | fixed: 0 | quotient: Z in degree 2 | quotient-rel-fixed: Z in degree 2
stable    singular: Z in degree 2 | fixed: Z in degree 2 | quotient: Z in degree 2 | quotient-rel-fixed: 0
unstable  singular: Z in degree 2 | fixed: Z in degree 1 | quotient: 0 | quotient-rel-fixed: Z in degree 2
";
    assert_eq!(out, expected);
}

#[test]
fn specseq_pages_as_csv() {
    let out = run_ok(&["specseq", &path("antipodal_circle"), "--coeff", "singular", "--format", "csv"]);
    assert!(out.contains("## system=singular converges=true\nr,p,q,dim\n"));
    assert!(out.contains("1,1,-1,2\n"));
    assert!(out.contains("2,1,-1,1\n"));
}

#[test]
fn smith_reports_and_exit_codes() {
    let out = run_ok(&["smith", &path("sphere_reflection")]);
    assert!(out.contains("l = 0: 2 <= 2  ok\n"));
    assert!(out.contains("chi: 0 = 2 mod 2  ok"));
    let out = run_ok(&["smith", &path("sphere_c3"), "--p", "3", "--format", "csv"]);
    assert!(out.ends_with("chi,2,2,true\n"), "{out}");
    let out = run_ok(&["smith", &path("circle_height"), "--stabilize"]);
    assert!(out.contains("dim H_k(X^G; F2) = [2]"));
    let bad = eqmorse(&["smith", &path("triangle_s3")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("not a power of 2"));
}

#[test]
fn malformed_fixture_reports_the_line() {
    let dir = std::env::temp_dir().join(format!("eqmorse-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.toml");
    std::fs::write(&file, "name = \"bad\"\ngroup = { kind = \"cyclic\", order = 2 }\n[gcw]\ncells = 3\n").unwrap();
    let out = eqmorse(&["bredon", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}
