use std::path::PathBuf;

use ddvol::cli;
use ddvol::ddiff_surface::GeomConfig;
use ddvol::format;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("ddvol").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(key)).then(|| l.rsplit("  ").next().unwrap())
        })
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
}

#[test]
fn check_reports_orders() {
    let (code, out, _) = run(&["check", &data("pillowcase.json")]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "kappa"), "(-1,-1,-1,-1)");
    let (code, out, _) = run(&["check", &data("square_torus.json")]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "kappa"), "(0)");
}

#[test]
fn corrupted_rot_names_the_edge() {
    let (code, _, err) = run(&["check", &data("invalid/pillowcase_corrupted_rot.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("gluing mismatch at edge 2"), "{err}");
}

#[test]
fn non_primitive_stops_at_cover() {
    let (code, _, err) = run(&["pipeline", &data("invalid/pillowcase_d4_even_rot.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("not primitive"), "{err}");
}

#[test]
fn pillowcase_cover_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("cover.json");
    let (code, out, _) = run(&["cover", &data("pillowcase.json"), "--dump", dump.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "cover_genus"), "1");
    assert_eq!(value(&out, "cover_vertices"), "4");
    assert_eq!(value(&out, "cover_kappa"), "(0,0,0,0)");
    let t = format::read_surface(&std::fs::read_to_string(&dump).unwrap(), &GeomConfig::default()).unwrap();
    assert_eq!((t.d(), t.genus(), t.kappa().to_vec()), (1, 1, vec![0, 0, 0, 0]));
}

#[test]
fn pipelines_pass_on_all_fixtures() {
    for name in [
        "square_torus.json",
        "equilateral_torus.json",
        "l_shape.json",
        "pillowcase.json",
        "triangle_pillow_d3.json",
        "right_isosceles_pillow_d4.json",
        "thirty_sixty_pillow_d6.json",
    ] {
        let (code, out, err) = run(&["pipeline", "--exact", &data(name)]);
        assert_eq!(code, 0, "{name}\n{out}{err}");
    }
}

#[test]
fn unsupported_exact_d_only_skips_the_ratio() {
    let (code, out, _) = run(&["pipeline", "--exact", &data("golden_pillow_d5.json")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ratio skipped: no lattice normalization for d = 5"));
    assert!(out.contains("# check cover_witness PASS"));
    let (code, _, err) = run(&["volform", "--ratio", &data("golden_pillow_d5.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("d = 5"));
}

#[test]
fn ratio_csv_for_square_torus() {
    let (code, out, _) = run(&["volform", "--ratio", &data("square_torus.json")]);
    assert_eq!(code, 0);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, cli::RATIO_COLUMNS);
    let row: Vec<String> = rdr.records().next().unwrap().unwrap().iter().map(String::from).collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[8], "1/4");
    assert_eq!(row[9], "PowerOfTwo");
}

#[test]
fn delaunay_output_is_delaunay() {
    let dir = tempfile::tempdir().unwrap();
    let sheared = dir.path().join("sheared.json");
    let mut f = format::SurfaceFile::parse(&std::fs::read_to_string(data("square_torus.json")).unwrap()).unwrap();
    for side in &mut f.sides {
        let (x, y): (i64, i64) = (side[0].parse().unwrap(), side[1].parse().unwrap());
        side[0] = (x + 7 * y).to_string();
    }
    std::fs::write(&sheared, f.render()).unwrap();
    let (code, out, err) = run(&["delaunay", sheared.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("# check delaunay_certified PASS"));
    let flipped = dir.path().join("flipped.json");
    std::fs::write(&flipped, &out).unwrap();
    let (code, _, err) = run(&["delaunay", flipped.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(err.contains("flips        exact  0"), "{err}");
}

#[test]
fn cylinders_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rect.json");
    let s = ddvol::fixtures::exactify(ddvol::fixtures::rectangle_torus(1.0, 5.0));
    std::fs::write(&p, format::write_surface(&s)).unwrap();
    let (code, out, _) = run(&["cylinders", p.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let table: Vec<&str> = out.lines().skip_while(|l| !l.starts_with("direction")).filter(|l| !l.starts_with('#')).collect();
    let table = table.join("\n");
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, cli::CYLINDER_COLUMNS);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 5.0);
}

#[test]
fn mc_is_deterministic() {
    let a = run(&["mc", &data("pillowcase.json"), "--samples", "3000", "--seed", "9"]);
    let b = run(&["mc", &data("pillowcase.json"), "--samples", "3000", "--seed", "9"]);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
    assert_eq!(value(&a.1, "bound").parse::<f64>().unwrap(), 256.0);
}

#[test]
fn suite_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = run(&["suite", d, "--seed", "4", "--count", "5", "--geometric", "2"]);
    let b = run(&["suite", d, "--seed", "4", "--count", "5", "--geometric", "2"]);
    assert_eq!(a.0, 0, "{}", a.1);
    assert_eq!(a, b);
    assert!(a.1.contains(&cli::SUITE_COLUMNS.join(",")));
}

#[test]
fn suite_names_a_violated_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("pillowcase.json")).unwrap().replace("[-1,-1,-1,-1]", "[-1,-1,-1,0]");
    std::fs::write(dir.path().join("bad.json"), text).unwrap();
    let (code, out, _) = run(&["suite", dir.path().to_str().unwrap(), "--count", "0", "--geometric", "0"]);
    assert_eq!(code, 1);
    assert!(out.contains("# failed kappa_expected"), "{out}");
}
