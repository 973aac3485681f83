//! The analyze pipeline: load/generate, validate, normalize, operators,
//! spectrum, pinching diagnostics, sphere map, constants.

use std::time::Instant;

use nalgebra::Vector3;
use pinchlab::mesh::{center_of_mass, normalize, validate, Mesh, NormalizationRecord};
use pinchlab::operators::{build_mass, build_stiffness, mean_curvature, shape_operator, vertex_normals};
use pinchlab::pinching::{
    analytic_constants, annulus_check, coverage_check, lemma_chain_report, lp_norm, numeric_slack,
    pinching_defect, samples_for_epsilon, shiohama_xu_check, AnalyticConstants,
};
use pinchlab::spectral::lambda1_for_mesh;
use pinchlab::sphere_map::{quasi_isometry_report, QuasiIsometryReport, SphereMapResult};
use pinchlab::pinching::LemmaChainReport;

use crate::jsonfmt::Json;
use crate::report;
use crate::{AnalyzeArgs, ConstantsArgs, GenArgs, NumericArgs, StageError};

/// Everything one pipeline run measures, in typed form.
pub struct AnalysisRecord {
    pub vertex_count: usize,
    pub face_count: usize,
    pub normalization: NormalizationRecord,
    pub lambda1: f64,
    pub solver_residual: f64,
    pub norm_h2p: f64,
    pub reilly_rhs: f64,
    pub defect: f64,
    pub sphere_radius: f64,
    pub center: Vector3<f64>,
    pub chain: LemmaChainReport,
    pub effective_samples: usize,
    pub hausdorff: f64,
    pub annulus_dev: f64,
    pub coverage_gap: f64,
    pub reilly_holds: bool,
    pub annulus_holds: bool,
    pub coverage_holds: bool,
    pub shiohama_value: f64,
    pub shiohama_passes: bool,
    pub map: SphereMapResult,
    pub quasi: QuasiIsometryReport,
    pub constants: AnalyticConstants,
    pub timings_ms: Vec<(&'static str, f64)>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Run the full pipeline on a raw mesh. Returns the record plus the
/// normalized mesh (for optional dumps).
pub fn analyze_mesh(raw: &Mesh, numeric: &NumericArgs) -> Result<(AnalysisRecord, Mesh), StageError> {
    if !(numeric.p >= 2.0) {
        return Err(StageError::usage("config", format!("--p must be >= 2, got {}", numeric.p)));
    }
    if !(numeric.theta > 0.0 && numeric.theta < 1.0) {
        return Err(StageError::usage("config", format!("--theta must lie in (0,1), got {}", numeric.theta)));
    }
    if !(numeric.epsilon > 0.0 && numeric.eta > 0.0) {
        return Err(StageError::usage("config", "--epsilon and --eta must be positive"));
    }
    if !(numeric.sobolev_k > 0.0 && numeric.ktilde > 0.0) {
        return Err(StageError::usage("config", "--K and --Ktilde must be positive"));
    }
    let mut timings: Vec<(&'static str, f64)> = Vec::new();

    let t = Instant::now();
    let check = validate(raw);
    if let Some(msg) = check.first_message() {
        return Err(StageError {
            stage: "validate",
            code: crate::exit_code::VALIDATION,
            message: msg,
        });
    }
    timings.push(("validateMs", ms(t)));

    let t = Instant::now();
    let (mesh, normalization) =
        normalize(raw).map_err(|e| StageError::from_lib("normalize", e))?;
    timings.push(("normalizeMs", ms(t)));

    let t = Instant::now();
    let stiffness = build_stiffness(&mesh);
    let mass = build_mass(&mesh);
    let normals = vertex_normals(&mesh).map_err(|e| StageError::from_lib("operators", e))?;
    let mean_curv = mean_curvature(&mesh, &stiffness, &mass, &normals);
    let shape = shape_operator(&mesh, &normals).map_err(|e| StageError::from_lib("operators", e))?;
    timings.push(("operatorsMs", ms(t)));

    let t = Instant::now();
    let pair = lambda1_for_mesh(&mesh, &stiffness, &mass, numeric.tol, numeric.max_iter)
        .map_err(|e| StageError::from_lib("spectral", e))?;
    timings.push(("spectralMs", ms(t)));
    let lambda1 = pair.lambda1;

    let t = Instant::now();
    let norm_h2p = lp_norm(&mean_curv, &mass, 2.0 * numeric.p)
        .map_err(|e| StageError::from_lib("pinching", e))?;
    let reilly_rhs = 2.0 * norm_h2p * norm_h2p;
    let defect = pinching_defect(2, norm_h2p, lambda1);
    let reilly_holds = lambda1 <= reilly_rhs + numeric_slack(reilly_rhs, lambda1);
    let sphere_radius = (2.0 / lambda1).sqrt();
    let center = center_of_mass(&mesh, &mass);
    let chain = lemma_chain_report(&mesh, &mass, &normals, &mean_curv, lambda1, defect)
        .map_err(|e| StageError::from_lib("pinching", e))?;

    let effective_samples = samples_for_epsilon(sphere_radius, numeric.epsilon, numeric.samples);
    let (annulus_holds, annulus_dev) = annulus_check(&mesh, &center, sphere_radius, numeric.epsilon);
    let (coverage_holds, coverage_gap) =
        coverage_check(&mesh, &center, sphere_radius, numeric.epsilon, effective_samples);
    let hausdorff = annulus_dev.max(coverage_gap);
    let (shiohama_value, shiohama_passes) = shiohama_xu_check(&shape, &mean_curv, &mass);
    timings.push(("pinchingMs", ms(t)));

    let t = Instant::now();
    let (map, quasi) = quasi_isometry_report(&mesh, &normals, lambda1, numeric.theta)
        .map_err(|e| StageError::from_lib("sphere-map", e))?;
    timings.push(("sphereMapMs", ms(t)));

    let constants = analytic_constants(2, numeric.sobolev_k, numeric.ktilde, 60)
        .map_err(|e| StageError::from_lib("constants", e))?;

    Ok((
        AnalysisRecord {
            vertex_count: raw.vertex_count(),
            face_count: raw.face_count(),
            normalization,
            lambda1,
            solver_residual: pair.residual,
            norm_h2p,
            reilly_rhs,
            defect,
            sphere_radius,
            center,
            chain,
            effective_samples,
            hausdorff,
            annulus_dev,
            coverage_gap,
            reilly_holds,
            annulus_holds,
            coverage_holds,
            shiohama_value,
            shiohama_passes,
            map,
            quasi,
            constants,
            timings_ms: timings,
        },
        mesh,
    ))
}

pub fn run_gen(args: &GenArgs) -> Result<(), StageError> {
    let spec = args.shape.to_spec()?;
    let mesh = spec.build().map_err(|e| StageError::from_lib("generate", e))?;
    pinchlab::io::save_mesh(&mesh, &args.out).map_err(|e| StageError::from_lib("io", e))?;
    println!(
        "wrote {} ({} vertices, {} faces)",
        args.out.display(),
        mesh.vertex_count(),
        mesh.face_count()
    );
    Ok(())
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn run_analyze_command(args: &AnalyzeArgs) -> Result<(), StageError> {
    let total = Instant::now();
    let (raw, source, input_hash) = match (&args.input, &args.shape.shape) {
        (Some(path), None) => {
            let bytes = std::fs::read(path).map_err(|e| StageError::io("load", e))?;
            let mesh =
                pinchlab::io::load_mesh(path).map_err(|e| StageError::from_lib("load", e))?;
            (
                mesh,
                format!("file: {}", path.display()),
                Some(format!("fnv1a64:{:016x}", fnv1a64(&bytes))),
            )
        }
        (None, Some(_)) => {
            let spec = args.shape.to_spec()?;
            let mesh = spec.build().map_err(|e| StageError::from_lib("generate", e))?;
            (mesh, format!("generator: {spec}"), None)
        }
        (Some(_), Some(_)) => {
            return Err(StageError::usage("config", "give either --in or --shape, not both"))
        }
        (None, None) => return Err(StageError::usage("config", "need an --in file or a --shape")),
    };

    let (record, normalized) = analyze_mesh(&raw, &args.numeric)?;

    if let Some(path) = &args.dump_normalized {
        pinchlab::io::save_mesh(&normalized, path).map_err(|e| StageError::from_lib("io", e))?;
    }
    if let Some(path) = &args.dump_mapped {
        let mapped = Mesh::new(record.map.image_vertices.clone(), normalized.faces().to_vec())
            .map_err(|e| StageError::from_lib("io", e))?;
        pinchlab::io::save_mesh(&mapped, path).map_err(|e| StageError::from_lib("io", e))?;
    }

    let provenance = report::provenance_json(&source, input_hash.as_deref(), &record, &args.numeric);
    let doc = report::analysis_document(provenance, &record, total.elapsed().as_secs_f64() * 1e3);
    let rendered = doc.render();
    match &args.report {
        Some(path) => {
            std::fs::write(path, rendered).map_err(|e| StageError::io("report", e))?;
            println!(
                "lambda1 {:.6}  defect {:.6}  d_H {:.6}  report {}",
                record.lambda1,
                record.defect,
                record.hausdorff,
                path.display()
            );
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

pub fn run_constants(args: &ConstantsArgs) -> Result<(), StageError> {
    if args.n < 2 {
        return Err(StageError::usage("config", format!("--n must be >= 2, got {}", args.n)));
    }
    if !(args.sobolev_k > 0.0) {
        return Err(StageError::usage("config", "--K must be positive"));
    }
    let constants = analytic_constants(args.n, args.sobolev_k, args.ktilde, args.terms)
        .map_err(|e| StageError::from_lib("constants", e))?;
    println!(
        "n={} K={} Ktilde={}: c_n={:.12} d_n={:.12} (c*d={}) alpha={:.15} beta={:.15} L={:.12} q={:.15}",
        args.n,
        args.sobolev_k,
        args.ktilde,
        constants.c_n,
        constants.d_n,
        constants.c_n * constants.d_n,
        constants.alpha,
        constants.beta,
        constants.moser_l,
        constants.q
    );
    if let Some(path) = &args.report {
        let mut provenance = Json::object();
        provenance.push("source", Json::Str("constants".into()));
        provenance.push("n", Json::Int(args.n as i64));
        provenance.push("sobolevK", Json::Float(args.sobolev_k));
        provenance.push("ktilde", Json::Float(args.ktilde));
        provenance.push("terms", Json::Int(args.terms as i64));
        let doc = report::constants_document(provenance, &constants);
        std::fs::write(path, doc.render()).map_err(|e| StageError::io("report", e))?;
    }
    Ok(())
}
