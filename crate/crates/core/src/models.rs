//! Curated model constructors with closed-form or oracle-checkable
//! behavior, the lattice delta-interaction family, coupling calibration
//! and the model file format.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extension::{krein_resolvent_apply, ExtensionSpec};
use crate::field::{KreinField, TraceMap};
use crate::operator::{BaseOperator, CMatrix, CVector};

/// Residual ceiling for the calibration resolvent match.
pub const CALIBRATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    ScalarZero,
    DiagPair,
    RandomHermitian { n: usize, k: usize, seed: u64 },
    LatticeLaplacianDelta {
        n: usize,
        half_width: f64,
        delta_site: usize,
    },
    FromFile { path: String },
}

/// Lattice geometry attached to delta-interaction models.
#[derive(Debug, Clone, Copy)]
pub struct LatticeInfo {
    pub spacing: f64,
    pub site: usize,
}

/// A built model: the base operator, the trace map, and optional extras
/// carried by the file format or the lattice constructor.
#[derive(Debug)]
pub struct Model {
    pub operator: BaseOperator,
    pub trace: TraceMap,
    pub theta: Option<CMatrix>,
    pub lattice: Option<LatticeInfo>,
}

/// Random Hermitian matrix with entries uniform in the unit square,
/// symmetrized; the seed is part of the model identity.
pub fn random_hermitian_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let raw = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (raw.clone() + raw.adjoint()).scale(0.5)
}

pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    match spec {
        ModelSpec::ScalarZero => {
            let operator = BaseOperator::dense_from_real(&[&[0.0]])?;
            let trace = TraceMap::from_real_rows(&[&[1.0]], &operator)?;
            Ok(Model {
                operator,
                trace,
                theta: None,
                lattice: None,
            })
        }
        ModelSpec::DiagPair => {
            let operator = BaseOperator::dense_from_real(&[&[1.0, 0.0], &[0.0, -1.0]])?;
            let trace = TraceMap::from_real_rows(&[&[1.0, 1.0]], &operator)?;
            Ok(Model {
                operator,
                trace,
                theta: None,
                lattice: None,
            })
        }
        ModelSpec::RandomHermitian { n, k, seed } => {
            let (n, k) = (*n, *k);
            if n == 0 || k == 0 || k > n {
                return Err(Error::InvalidSpec(format!(
                    "random model needs 1 <= k <= n, got n={n}, k={k}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let operator = BaseOperator::dense(random_hermitian_matrix(n, &mut rng))?;
            let tau = CMatrix::from_fn(k, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let trace = TraceMap::new(tau, &operator)?;
            Ok(Model {
                operator,
                trace,
                theta: None,
                lattice: None,
            })
        }
        ModelSpec::LatticeLaplacianDelta {
            n,
            half_width,
            delta_site,
        } => {
            let (n, l, site) = (*n, *half_width, *delta_site);
            if n < 3 {
                return Err(Error::InvalidSpec(format!("lattice needs n >= 3, got {n}")));
            }
            if !(l > 0.0) {
                return Err(Error::InvalidSpec(format!("half width must be positive, got {l}")));
            }
            if site >= n {
                return Err(Error::InvalidSpec(format!(
                    "delta site {site} outside the {n} interior grid points"
                )));
            }
            // Dirichlet Laplacian on the n interior points of [-L, L].
            let h = 2.0 * l / (n + 1) as f64;
            let diag = vec![2.0 / (h * h); n];
            let off = vec![Complex64::new(-1.0 / (h * h), 0.0); n - 1];
            let operator = BaseOperator::tridiagonal(diag, off)?;
            let mut row = vec![0.0; n];
            row[site] = 1.0;
            let trace = TraceMap::from_real_rows(&[&row], &operator)?;
            Ok(Model {
                operator,
                trace,
                theta: None,
                lattice: Some(LatticeInfo { spacing: h, site }),
            })
        }
        ModelSpec::FromFile { path } => read_model(Path::new(path)),
    }
}

/// Bound-state energy -alpha^2/4 of the continuum operator
/// -d^2/dx^2 - alpha delta_0; the mesh-refinement target.
pub fn continuum_delta_reference(alpha: f64) -> f64 {
    -alpha * alpha / 4.0
}

/// Calibrates the scalar boundary parameter so the Krein family
/// reproduces the rank-one perturbation A + s v v* with v the (single)
/// trace direction. The value is checked by matching resolvents at two
/// probes; a mismatch fails loudly.
pub fn calibrate_rank_one_theta(field: &KreinField, coupling: f64) -> Result<ExtensionSpec> {
    if field.aux_dim() != 1 {
        return Err(Error::CalibrationFailure(format!(
            "scalar calibration needs k = 1, got k = {}",
            field.aux_dim()
        )));
    }
    if coupling == 0.0 || !coupling.is_finite() {
        return Err(Error::CalibrationFailure(
            "zero coupling has no finite Theta (the base operator is the |Theta| -> infinity limit)"
                .into(),
        ));
    }
    let tau_gstar = (field.trace().matrix() * field.g_star())[(0, 0)];
    let theta = 1.0 / coupling - tau_gstar.re;
    let spec = ExtensionSpec::scalar(theta);

    // Verify by matching the Krein resolvent against a Sherman-Morrison
    // solve for the target operator at two probes.
    let n = field.dim();
    let v = CVector::from_fn(n, |i, _| field.trace().matrix()[(0, i)].conj());
    let test = CVector::from_fn(n, |i, _| {
        Complex64::new(((i % 7) as f64 - 3.0) / 3.0, ((i % 5) as f64 - 2.0) / 5.0)
    });
    for z in [Complex64::new(0.37, 1.3), Complex64::new(-1.1, 0.8)] {
        let krein = krein_resolvent_apply(field, &spec, z, &test)?;
        let rv = field.operator().solve_shifted_vec(z, &v)?;
        let rw = field.operator().solve_shifted_vec(z, &test)?;
        let g = v.dotc(&rv);
        let denom = Complex64::ONE - g * coupling;
        if denom.norm() < 1e-12 {
            return Err(Error::CalibrationFailure(format!("probe {z} is singular for the target")));
        }
        let direct = &rw + &rv * (v.dotc(&rw) * coupling / denom);
        let residual = (&krein - &direct).norm() / direct.norm().max(1.0);
        if residual > CALIBRATION_TOL {
            return Err(Error::CalibrationFailure(format!(
                "resolvent mismatch {residual:.3e} at probe {z}"
            )));
        }
    }
    Ok(spec)
}

/// Lattice-delta calibration: alpha > 0 targets A - (alpha/h) e_site e_site*.
pub fn calibrate_theta_for_coupling(
    field: &KreinField,
    lattice: &LatticeInfo,
    alpha: f64,
) -> Result<ExtensionSpec> {
    if alpha == 0.0 {
        return Err(Error::CalibrationFailure(
            "zero coupling has no finite Theta (the base operator is the |Theta| -> infinity limit)"
                .into(),
        ));
    }
    calibrate_rank_one_theta(field, -alpha / lattice.spacing)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

fn fmt_complex(c: Complex64) -> String {
    format!("{} {}", fmt_f64(c.re), fmt_f64(c.im))
}

/// Serializes a model to the versioned text format: header, dimensions,
/// operator block, trace block and optional Theta block, with entries as
/// paired decimals at 17-digit precision.
pub fn write_model(path: &Path, model: &Model) -> Result<()> {
    let mut out = String::new();
    let n = model.operator.dim();
    let k = model.trace.aux_dim();
    out.push_str("krein-model v1\n");
    match model.operator.band() {
        None => {
            writeln!(out, "kind dense").unwrap();
            writeln!(out, "dim {n}").unwrap();
            writeln!(out, "aux {k}").unwrap();
            out.push_str("matrix\n");
            let dense = model.operator.to_dense();
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| fmt_complex(dense[(i, j)])).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        Some((diag, off)) => {
            writeln!(out, "kind tridiagonal").unwrap();
            writeln!(out, "dim {n}").unwrap();
            writeln!(out, "aux {k}").unwrap();
            out.push_str("diag\n");
            let row: Vec<String> = diag.iter().map(|&d| fmt_f64(d)).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
            out.push_str("off\n");
            let row: Vec<String> = off.iter().map(|&c| fmt_complex(c)).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out.push_str("trace\n");
    for i in 0..k {
        let row: Vec<String> = (0..n)
            .map(|j| fmt_complex(model.trace.matrix()[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    if let Some(theta) = &model.theta {
        out.push_str("theta\n");
        for i in 0..k {
            let row: Vec<String> = (0..k).map(|j| fmt_complex(theta[(i, j)])).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out.push_str("end\n");
    std::fs::write(path, out)?;
    Ok(())
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn next(&mut self) -> Result<&'a str> {
        loop {
            match self.lines.next() {
                Some(l) => {
                    self.line_no += 1;
                    let t = l.trim();
                    if !t.is_empty() {
                        return Ok(t);
                    }
                }
                None => {
                    return Err(Error::FileFormat(format!(
                        "unexpected end of file after line {}",
                        self.line_no
                    )))
                }
            }
        }
    }
}

fn parse_f64(tok: &str, line_no: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::FileFormat(format!("bad number '{tok}' on line {line_no}")))
}

fn parse_pairs(line: &str, count: usize, line_no: usize) -> Result<Vec<Complex64>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 2 * count {
        return Err(Error::FileFormat(format!(
            "expected {} numbers on line {line_no}, got {}",
            2 * count,
            toks.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for p in 0..count {
        out.push(Complex64::new(
            parse_f64(toks[2 * p], line_no)?,
            parse_f64(toks[2 * p + 1], line_no)?,
        ));
    }
    Ok(out)
}

pub fn read_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    let mut r = LineReader {
        lines: text.lines(),
        line_no: 0,
    };
    let header = r.next()?;
    if header != "krein-model v1" {
        return Err(Error::FileFormat(format!("unknown header '{header}'")));
    }
    let kind_line = r.next()?;
    let kind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| Error::FileFormat(format!("expected 'kind', got '{kind_line}'")))?;
    let dim_line = r.next()?;
    let n: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::FileFormat(format!("expected 'dim <n>', got '{dim_line}'")))?;
    let aux_line = r.next()?;
    let k: usize = aux_line
        .strip_prefix("aux ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::FileFormat(format!("expected 'aux <k>', got '{aux_line}'")))?;

    let operator = match kind {
        "dense" => {
            let tag = r.next()?;
            if tag != "matrix" {
                return Err(Error::FileFormat(format!("expected 'matrix', got '{tag}'")));
            }
            let mut entries = CMatrix::zeros(n, n);
            for i in 0..n {
                let row = parse_pairs(r.next()?, n, r.line_no)?;
                for (j, c) in row.into_iter().enumerate() {
                    entries[(i, j)] = c;
                }
            }
            BaseOperator::dense(entries)?
        }
        "tridiagonal" => {
            let tag = r.next()?;
            if tag != "diag" {
                return Err(Error::FileFormat(format!("expected 'diag', got '{tag}'")));
            }
            let line = r.next()?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != n {
                return Err(Error::FileFormat(format!(
                    "expected {n} diagonal entries, got {}",
                    toks.len()
                )));
            }
            let mut diag = Vec::with_capacity(n);
            for t in toks {
                diag.push(parse_f64(t, r.line_no)?);
            }
            let tag = r.next()?;
            if tag != "off" {
                return Err(Error::FileFormat(format!("expected 'off', got '{tag}'")));
            }
            let off = parse_pairs(r.next()?, n - 1, r.line_no)?;
            BaseOperator::tridiagonal(diag, off)?
        }
        other => {
            return Err(Error::FileFormat(format!("unknown operator kind '{other}'")));
        }
    };

    let tag = r.next()?;
    if tag != "trace" {
        return Err(Error::FileFormat(format!("expected 'trace', got '{tag}'")));
    }
    let mut tau = CMatrix::zeros(k, n);
    for i in 0..k {
        let row = parse_pairs(r.next()?, n, r.line_no)?;
        for (j, c) in row.into_iter().enumerate() {
            tau[(i, j)] = c;
        }
    }
    let trace = TraceMap::new(tau, &operator)?;

    let mut theta = None;
    let tag = r.next()?;
    let tag = if tag == "theta" {
        let mut t = CMatrix::zeros(k, k);
        for i in 0..k {
            let row = parse_pairs(r.next()?, k, r.line_no)?;
            for (j, c) in row.into_iter().enumerate() {
                t[(i, j)] = c;
            }
        }
        theta = Some(t);
        r.next()?
    } else {
        tag
    };
    if tag != "end" {
        return Err(Error::FileFormat(format!("expected 'end', got '{tag}'")));
    }
    Ok(Model {
        operator,
        trace,
        theta,
        lattice: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::recover_operator;

    #[test]
    fn fixtures_build() {
        let m = build_model(&ModelSpec::ScalarZero).unwrap();
        assert_eq!(m.operator.dim(), 1);
        assert_eq!(m.trace.aux_dim(), 1);

        let m = build_model(&ModelSpec::DiagPair).unwrap();
        assert_eq!(m.operator.dim(), 2);
        let vals = m.operator.eigenvalues();
        assert_eq!(vals, &[-1.0, 1.0]);
    }

    #[test]
    fn every_model_passes_build_field() {
        let specs = [
            ModelSpec::ScalarZero,
            ModelSpec::DiagPair,
            ModelSpec::RandomHermitian { n: 8, k: 3, seed: 7 },
            ModelSpec::LatticeLaplacianDelta {
                n: 199,
                half_width: 20.0,
                delta_site: 99,
            },
        ];
        for spec in specs {
            let m = build_model(&spec).unwrap();
            KreinField::build(m.operator, m.trace).unwrap();
        }
    }

    #[test]
    fn lattice_is_hermitian_with_full_rank_trace() {
        let m = build_model(&ModelSpec::LatticeLaplacianDelta {
            n: 1999,
            half_width: 20.0,
            delta_site: 999,
        })
        .unwrap();
        let (diag, off) = m.operator.band().unwrap();
        let h = m.lattice.unwrap().spacing;
        assert!((h - 0.02).abs() < 1e-15);
        assert!(diag.iter().all(|&d| (d - 2.0 / (h * h)).abs() < 1e-9));
        assert!(off.iter().all(|&c| (c.re + 1.0 / (h * h)).abs() < 1e-9 && c.im == 0.0));
    }

    #[test]
    fn continuum_reference_values() {
        assert_eq!(continuum_delta_reference(2.0), -1.0);
        assert_eq!(continuum_delta_reference(1.0), -0.25);
        let mut prev = 0.0;
        for a in [0.8, 0.4, 0.2, 0.1] {
            let e = continuum_delta_reference(a);
            assert!(e < 0.0 && e > prev - 1.0);
            prev = e;
        }
    }

    #[test]
    fn calibrate_diag_pair_closed_form() {
        // Target A + (1/2) v v* with v = [1, 1]; the matching Theta is 2.
        let m = build_model(&ModelSpec::DiagPair).unwrap();
        let field = KreinField::build(m.operator, m.trace).unwrap();
        let spec = calibrate_rank_one_theta(&field, 0.5).unwrap();
        let theta = spec.theta().unwrap()[(0, 0)];
        assert!((theta - Complex64::new(2.0, 0.0)).norm() < 1e-10);

        let hat = recover_operator(&field, &spec, Complex64::new(0.0, 2.0)).unwrap();
        let expected = BaseOperator::dense_from_real(&[&[1.5, 0.5], &[0.5, -0.5]]).unwrap();
        assert!((hat.to_dense() - expected.to_dense()).norm() < 1e-9);
    }

    #[test]
    fn calibrate_zero_coupling_fails() {
        let m = build_model(&ModelSpec::LatticeLaplacianDelta {
            n: 99,
            half_width: 10.0,
            delta_site: 49,
        })
        .unwrap();
        let info = m.lattice.unwrap();
        let field = KreinField::build(m.operator, m.trace).unwrap();
        let err = calibrate_theta_for_coupling(&field, &info, 0.0).unwrap_err();
        assert!(matches!(err, Error::CalibrationFailure(_)));
    }

    #[test]
    fn calibrated_lattice_matches_direct_perturbation() {
        let m = build_model(&ModelSpec::LatticeLaplacianDelta {
            n: 199,
            half_width: 20.0,
            delta_site: 99,
        })
        .unwrap();
        let info = m.lattice.unwrap();
        let field = KreinField::build(m.operator, m.trace).unwrap();
        let spec = calibrate_theta_for_coupling(&field, &info, 2.0).unwrap();

        // Direct lattice delta: diagonal dent of strength alpha/h.
        let (diag, off) = field.operator().band().unwrap();
        let mut diag2 = diag.to_vec();
        diag2[info.site] -= 2.0 / info.spacing;
        let target = BaseOperator::tridiagonal(diag2, off.to_vec()).unwrap();
        let lowest_direct = target.eigenvalues()[0];

        let found = crate::extension::eigen_solve(&field, &spec, (-3.0, -1e-3), 64).unwrap();
        assert_eq!(found.len(), 1);
        assert!(
            (found[0].lambda - lowest_direct).abs() < 1e-7,
            "{} vs {}",
            found[0].lambda,
            lowest_direct
        );
    }

    #[test]
    fn file_roundtrip_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [
            ModelSpec::RandomHermitian { n: 6, k: 2, seed: 5 },
            ModelSpec::LatticeLaplacianDelta {
                n: 49,
                half_width: 5.0,
                delta_site: 24,
            },
        ] {
            let mut m = build_model(&spec).unwrap();
            m.theta = Some(CMatrix::from_fn(
                m.trace.aux_dim(),
                m.trace.aux_dim(),
                |i, j| Complex64::new((i + j) as f64 / 3.0, 0.0),
            ));
            let p1 = dir.path().join("a.model");
            let p2 = dir.path().join("b.model");
            write_model(&p1, &m).unwrap();
            let back = read_model(&p1).unwrap();
            write_model(&p2, &back).unwrap();
            let b1 = std::fs::read(&p1).unwrap();
            let b2 = std::fs::read(&p2).unwrap();
            assert_eq!(b1, b2);
            assert_eq!(back.operator.to_dense(), m.operator.to_dense());
            assert_eq!(back.trace.matrix(), m.trace.matrix());
            assert_eq!(back.theta, m.theta);
        }
    }

    #[test]
    fn malformed_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.model");
        std::fs::write(&p, "krein-model v1\nkind dense\ndim 2\naux 1\nmatrix\n1 0 0 0\n").unwrap();
        let err = read_model(&p).unwrap_err();
        assert!(matches!(err, Error::FileFormat(_)));
    }
}
