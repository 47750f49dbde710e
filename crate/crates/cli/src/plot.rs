//! gnuplot data files from report CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::Failure;

/// Parsed CSV: rows as column-name lookups.
struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, Failure> {
        let bad = |e: csv::Error| Failure::Compute(format!("{}: malformed CSV: {e}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(bad)?;
        let header = rdr.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(bad)?;
        Ok(Table {
            name: path.display().to_string(),
            header,
            rows,
        })
    }

    fn col(&self, name: &str) -> Result<usize, Failure> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Compute(format!("{}: malformed CSV: no `{name}` column", self.name)))
    }

    fn num(&self, row: usize, col: usize) -> Result<f64, Failure> {
        let s = &self.rows[row][col];
        s.parse()
            .map_err(|_| Failure::Compute(format!("{}: malformed CSV: `{s}` in row {} is not a number", self.name, row + 2)))
    }
}

fn write(out: &Path, name: &str, body: &str) -> Result<(), Failure> {
    let p = out.join(name);
    std::fs::write(&p, body).map_err(|e| Failure::io(&p, e))
}

fn warn_if_empty(t: &Table, dat: &str) {
    if t.rows.is_empty() {
        eprintln!("ucp-lab: warning: {} has no rows, {dat} is empty", t.name);
    }
}

/// One block per eigen-index, separated by two blank lines so gnuplot's
/// `index` selects them.
fn ratio_vs_l(t: &Table) -> Result<String, Failure> {
    let (cl, ce, cr) = (t.col("L")?, t.col("eig_idx")?, t.col("ratio")?);
    let mut blocks: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for i in 0..t.rows.len() {
        let k = t.num(i, ce)? as u64;
        blocks.entry(k).or_default().push((t.num(i, cl)?, t.num(i, cr)?));
    }
    let mut s = String::new();
    for (n, (k, pts)) in blocks.iter().enumerate() {
        if n > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# eig_idx {k}\n# L ratio");
        for (l, r) in pts {
            let _ = writeln!(s, "{l} {r:.16e}");
        }
    }
    Ok(s)
}

fn loglog(t: &Table) -> Result<String, Failure> {
    let (ce, cm, clo, chi, cs) = (
        t.col("epsilon")?,
        t.col("mean_count")?,
        t.col("ci_lo")?,
        t.col("ci_hi")?,
        t.col("slope_fit")?,
    );
    let mut s = String::new();
    if !t.rows.is_empty() {
        let _ = writeln!(s, "# slope {:.16e}", t.num(0, cs)?);
        s.push_str("# epsilon mean_count ci_lo ci_hi\n");
    }
    for i in 0..t.rows.len() {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e} {:.16e}",
            t.num(i, ce)?,
            t.num(i, cm)?,
            t.num(i, clo)?,
            t.num(i, chi)?
        );
    }
    Ok(s)
}

fn lambda_vs_t(t: &Table) -> Result<String, Failure> {
    let (ct, cl) = (t.col("t")?, t.col("lambda")?);
    let mut s = String::new();
    if !t.rows.is_empty() {
        s.push_str("# t lambda\n");
    }
    for i in 0..t.rows.len() {
        let _ = writeln!(s, "{:.16e} {:.16e}", t.num(i, ct)?, t.num(i, cl)?);
    }
    Ok(s)
}

const RECIPE_RATIO: &str = "set terminal pngcairo\nset output 'ratio_vs_L.png'\nset xlabel 'L'\nset ylabel 'ratio'\nset logscale y\nstats 'ratio_vs_L.dat' nooutput\nplot for [i=0:STATS_blocks-1] 'ratio_vs_L.dat' index i using 1:2 with linespoints title sprintf('eig %d', i)\nunset logscale\n";
const RECIPE_LOGLOG: &str = "set terminal pngcairo\nset output 'loglog.png'\nset xlabel 'epsilon'\nset ylabel 'mean count'\nset logscale xy\nplot 'loglog.dat' using 1:2:3:4 with yerrorbars title 'mean count', '' using 1:2 with lines notitle\nunset logscale\n";
const RECIPE_LIFT: &str = "set terminal pngcairo\nset output 'lambda_vs_t.png'\nset xlabel 't'\nset ylabel 'lambda(t)'\nplot 'lambda_vs_t.dat' using 1:2 with linespoints notitle\n";

/// Reads whichever of `ucp.csv`, `wegner.csv` and `lift.csv` exist in
/// `run_dir` and writes the matching `.dat` files and `plots.gp` to `out`.
pub fn emit(run_dir: &Path, out: &Path) -> Result<(), Failure> {
    type Builder = fn(&Table) -> Result<String, Failure>;
    let jobs: [(&str, &str, Builder, &str); 3] = [
        ("ucp.csv", "ratio_vs_L.dat", ratio_vs_l, RECIPE_RATIO),
        ("wegner.csv", "loglog.dat", loglog, RECIPE_LOGLOG),
        ("lift.csv", "lambda_vs_t.dat", lambda_vs_t, RECIPE_LIFT),
    ];
    let present: Vec<_> = jobs.iter().filter(|j| run_dir.join(j.0).is_file()).collect();
    if present.is_empty() {
        return Err(Failure::Config(format!(
            "{}: no ucp.csv, wegner.csv or lift.csv to plot",
            run_dir.display()
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let mut recipe = String::from("# gnuplot recipe; run from this directory with `gnuplot plots.gp`\n");
    for (csv_name, dat, build, snippet) in present {
        let table = Table::read(&run_dir.join(csv_name))?;
        let body = build(&table)?;
        warn_if_empty(&table, dat);
        write(out, dat, &body)?;
        recipe.push('\n');
        recipe.push_str(snippet);
    }
    write(out, "plots.gp", &recipe)
}
