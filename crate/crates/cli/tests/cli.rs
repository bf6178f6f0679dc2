use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn foliage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synth(dir: &Path, classes: usize, per_class: usize, jitter: &str) -> PathBuf {
    let data = dir.join("data");
    let o = foliage(&[
        "synth",
        p(&data),
        "--classes",
        &classes.to_string(),
        "--per-class",
        &per_class.to_string(),
        "--size",
        "96",
        "--jitter",
        jitter,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    data
}

fn tsv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

#[test]
fn build_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), 4, 2, "mild");
    let idx = dir.path().join("leaves.idx");
    let o = foliage(&["build", p(&data), "--out", p(&idx)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(&idx).unwrap();
    let again = dir.path().join("again.idx");
    assert!(foliage(&["build", p(&data), "--out", p(&again)]).status.success());
    assert_eq!(first, fs::read(&again).unwrap());

    let query = data.join("species_02/001.png");
    let o = foliage(&["query", p(&idx), p(&query), "--top-k", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "rank\tspecies\tscore\td_s\td_c\td_t\td_v");
    let rows = tsv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], "species_02");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);

    for measure in ["kullback-leibler", "city-block", "jensen-shannon"] {
        let o = foliage(&["query", p(&idx), p(&query), "--measure", measure, "--top-k", "5"]);
        assert!(o.status.success());
        let rows = tsv_rows(&stdout(&o));
        assert!(rows.len() <= 5);
        assert_eq!(rows[0][1], "species_02");
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = dir.path().join("x.idx");
    assert_eq!(foliage(&["build", p(&empty), "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(
        foliage(&["build", p(&dir.path().join("missing")), "--out", p(&out)]).status.code(),
        Some(2)
    );
    assert_eq!(foliage(&["query", p(&out), p(&out), "--measure", "manhattan"]).status.code(), Some(2));
    assert_eq!(foliage(&["query", p(&out), p(&out), "--weights", "1,2,3"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "measure = nope\n").unwrap();
    let img = dir.path().join("none.png");
    assert_eq!(
        foliage(&["--config", p(&cfg), "features", p(&img)]).status.code(),
        Some(2)
    );
}

#[test]
fn segmentation_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.pgm");
    let mut bytes = b"P5\n16 16\n255\n".to_vec();
    bytes.extend(std::iter::repeat_n(128u8, 256));
    fs::write(&flat, bytes).unwrap();
    let o = foliage(&["features", p(&flat)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn evaluate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), 5, 3, "mild");
    let out = dir.path().join("reports");
    let o = foliage(&[
        "evaluate",
        p(&data),
        "--refs-per-class",
        "1,2",
        "--queries-per-class",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "measure,refs_per_class,top1,top3,top5,seconds");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 14);
    for r in &rows {
        let acc: Vec<f64> = r[2..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(acc[0] <= acc[1] && acc[1] <= acc[2] && acc[2] <= 1.0);
        assert!(r[5].parse::<f64>().unwrap() >= 0.0);
    }
    for m in ["city-block", "euclidean", "canberra", "bray-curtis", "chi-square", "kullback-leibler", "jensen-shannon"] {
        assert!(out.join(format!("rpp_{m}.csv")).is_file(), "{m}");
    }

    let single = dir.path().join("single");
    let o = foliage(&[
        "evaluate",
        p(&data),
        "--measure",
        "canberra",
        "--refs-per-class",
        "2",
        "--queries-per-class",
        "1",
        "--out",
        p(&single),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(single.join("report.csv")).unwrap().lines().count(), 2);

    let o = foliage(&["evaluate", p(&data), "--refs-per-class", "3", "--queries-per-class", "1", "--out", p(&single)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), 5, 2, "mild");
    let idx = dir.path().join("i.idx");
    assert!(foliage(&["build", p(&data), "--out", p(&idx)]).status.success());
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# query settings\ntop-k = 2\nmeasure = chi-square\n").unwrap();
    let query = data.join("species_01/000.png");
    let o = foliage(&["--config", p(&cfg), "query", p(&idx), p(&query)]);
    assert!(o.status.success());
    assert_eq!(tsv_rows(&stdout(&o)).len(), 2);
    let o = foliage(&["--config", p(&cfg), "query", p(&idx), p(&query), "--top-k", "4"]);
    assert_eq!(tsv_rows(&stdout(&o)).len(), 4);
}

#[test]
fn features_json() {
    let dir = tempfile::tempdir().unwrap();
    // dark disk on light background, constant color inside
    let disk = dir.path().join("disk.ppm");
    let n = 101usize;
    let mut bytes = format!("P6\n{n} {n}\n255\n").into_bytes();
    for y in 0..n {
        for x in 0..n {
            let (dx, dy) = (x as f64 - 50.0, y as f64 - 50.0);
            let px = if dx * dx + dy * dy <= 40.0 * 40.0 { [30, 120, 40] } else { [240, 240, 240] };
            bytes.extend(px);
        }
    }
    fs::write(&disk, bytes).unwrap();
    let o = foliage(&["features", p(&disk)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let feats = doc["features"].as_array().unwrap();
    assert_eq!(feats.len(), 56);
    let get = |name: &str| {
        feats
            .iter()
            .find(|f| f["name"] == name)
            .unwrap_or_else(|| panic!("{name}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((get("eccentricity") - 1.0).abs() < 0.02);
    assert!((get("dispersion") - 1.0).abs() < 0.1);
    for c in ["red", "green", "blue"] {
        assert_eq!(get(&format!("{c}_std_dev")), 0.0);
    }
    assert_eq!(feats[0]["group"], "shape");
    assert_eq!(feats[55]["group"], "vein");
}

#[test]
fn dist_on_vector_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "1,2\n0,0\n").unwrap();
    fs::write(&b, "4, 6\n").unwrap();
    let o = foliage(&["dist", p(&a), p(&b), "--measure", "euclidean"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "25\n52\n");
    let o = foliage(&["dist", p(&a), p(&b)]);
    assert_eq!(stdout(&o), "7\n10\n");
    fs::write(&b, "1,2,3\n").unwrap();
    assert_eq!(foliage(&["dist", p(&a), p(&b)]).status.code(), Some(2));
}
