//! ReportDocument assembly. Field order is fixed; `timings` is always the
//! last top-level key so byte-comparison tools can quarantine it.

use pinchlab::pinching::AnalyticConstants;

use crate::jsonfmt::{vec3_json, Json};
use crate::pipeline::AnalysisRecord;
use crate::NumericArgs;

pub const SCHEMA_VERSION: i64 = 1;

pub fn provenance_json(
    source: &str,
    input_hash: Option<&str>,
    record: &AnalysisRecord,
    numeric: &NumericArgs,
) -> Json {
    let mut p = Json::object();
    p.push("source", Json::Str(source.into()));
    p.push(
        "inputHash",
        match input_hash {
            Some(h) => Json::Str(h.into()),
            None => Json::Null,
        },
    );
    p.push("vertexCount", Json::Int(record.vertex_count as i64));
    p.push("faceCount", Json::Int(record.face_count as i64));
    p.push("solverTol", Json::Float(numeric.tol));
    p.push("solverMaxIter", Json::Int(numeric.max_iter as i64));
    p.push("p", Json::Float(numeric.p));
    p.push("sobolevK", Json::Float(numeric.sobolev_k));
    p.push("ktilde", Json::Float(numeric.ktilde));
    p.push("epsilon", Json::Float(numeric.epsilon));
    p.push("eta", Json::Float(numeric.eta));
    p.push("theta", Json::Float(numeric.theta));
    p.push("requestedSamples", Json::Int(numeric.samples as i64));
    p.push("effectiveSamples", Json::Int(record.effective_samples as i64));
    p
}

fn normalization_json(record: &AnalysisRecord) -> Json {
    let mut n = Json::object();
    n.push("translation", vec3_json(&record.normalization.translation));
    n.push("scale", Json::Float(record.normalization.scale));
    n.push("originalArea", Json::Float(record.normalization.original_area));
    n
}

fn pinching_json(record: &AnalysisRecord) -> Json {
    let mut r = Json::object();
    r.push("lambda1", Json::Float(record.lambda1));
    r.push("solverResidual", Json::Float(record.solver_residual));
    r.push("normH2p", Json::Float(record.norm_h2p));
    r.push("reillyRhs", Json::Float(record.reilly_rhs));
    r.push("defect", Json::Float(record.defect));
    r.push("sphereRadius", Json::Float(record.sphere_radius));
    r.push("centerOfMass", vec3_json(&record.center));
    r.push("normX2Sq", Json::Float(record.chain.norm_x2_sq));
    r.push("normXt2Sq", Json::Float(record.chain.norm_xt2_sq));
    r.push("normY2Sq", Json::Float(record.chain.norm_y2_sq));
    r.push("normZ2Sq", Json::Float(record.chain.norm_z2_sq));
    r.push("normPhi2", Json::Float(record.chain.norm_phi2));
    r.push("normPhiInf", Json::Float(record.chain.norm_phi_inf));
    r.push("normPsiInf", Json::Float(record.chain.norm_psi_inf));
    r.push("hausdorff", Json::Float(record.hausdorff));
    r.push("annulusMaxDev", Json::Float(record.annulus_dev));
    r.push("coverageMaxGap", Json::Float(record.coverage_gap));
    r.push("distortionMax", Json::Float(record.map.distortion_max_numeric));
    r.push("shiohamaXuValue", Json::Float(record.shiohama_value));
    r.push("lemmaRatioA", Json::float_opt(record.chain.ratio_a));
    r.push("lemmaRatioB", Json::float_opt(record.chain.ratio_b));
    r.push("lemmaRatioD", Json::float_opt(record.chain.ratio_d));
    let mut flags = Json::object();
    flags.push("reillyHolds", Json::Bool(record.reilly_holds));
    flags.push("lemmaChainHolds", Json::Bool(record.chain.all_hold()));
    flags.push("annulusHolds", Json::Bool(record.annulus_holds));
    flags.push("coverageHolds", Json::Bool(record.coverage_holds));
    flags.push("shiohamaXuPasses", Json::Bool(record.shiohama_passes));
    r.push("flags", flags);
    r
}

fn sphere_map_json(record: &AnalysisRecord) -> Json {
    let q = &record.quasi;
    let mut s = Json::object();
    s.push("radius", Json::Float(q.radius));
    s.push("distortionMaxNumeric", Json::Float(q.distortion_max_numeric));
    s.push("distortionMaxAnalytic", Json::Float(q.distortion_max_analytic));
    s.push("flippedTriangleCount", Json::Int(q.flipped_triangle_count as i64));
    s.push("radialTerm", Json::Float(q.radial_term));
    s.push("tangentialTerm", Json::Float(q.tangential_term));
    s.push("normPsiInf", Json::Float(q.norm_psi_inf));
    s.push("localDiffeo", Json::Bool(q.local_diffeo));
    s.push("genus", Json::Int(q.genus));
    s.push("diffeomorphismPlausible", Json::Bool(q.diffeomorphism_plausible));
    s.push("theta", Json::Float(q.theta));
    s.push("withinTheta", Json::Bool(q.within_theta));
    s
}

fn constants_json(c: &AnalyticConstants) -> Json {
    let mut j = Json::object();
    j.push("cN", Json::Float(c.c_n));
    j.push("dN", Json::Float(c.d_n));
    j.push("alpha", Json::Float(c.alpha));
    j.push("beta", Json::Float(c.beta));
    j.push("moserL", Json::Float(c.moser_l));
    j.push("q", Json::Float(c.q));
    j
}

/// Full analyze document. Non-finite floats are nulled into `errors`;
/// `timings` sits last and carries no analysis data.
pub fn analysis_document(provenance: Json, record: &AnalysisRecord, total_ms: f64) -> Json {
    let mut doc = Json::object();
    doc.push("schemaVersion", Json::Int(SCHEMA_VERSION));
    doc.push("provenance", provenance);
    doc.push("normalization", normalization_json(record));
    doc.push("pinching", pinching_json(record));
    doc.push("sphereMap", sphere_map_json(record));
    doc.push("constants", constants_json(&record.constants));

    let mut flagged = Vec::new();
    doc.sanitize("$", &mut flagged);
    doc.push("errors", Json::Array(flagged.into_iter().map(Json::Str).collect()));

    let mut timings = Json::object();
    for (name, value) in &record.timings_ms {
        timings.push(name, Json::Float(*value));
    }
    timings.push("totalMs", Json::Float(total_ms));
    doc.push("timings", timings);
    doc
}

/// Constants-only document.
pub fn constants_document(provenance: Json, constants: &AnalyticConstants) -> Json {
    let mut doc = Json::object();
    doc.push("schemaVersion", Json::Int(SCHEMA_VERSION));
    doc.push("provenance", provenance);
    doc.push("constants", constants_json(constants));
    let mut flagged = Vec::new();
    doc.sanitize("$", &mut flagged);
    doc.push("errors", Json::Array(flagged.into_iter().map(Json::Str).collect()));
    doc
}
