//! Named configurations that regenerate the published error tables, with
//! the published values they are checked against.

use crate::config::{CorrectionKind, DtConfig, EstimatorKind, ExperimentConfig, GridConfig, ProblemConfig};

/// A published table row. Orders are absent where the table prints none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub h_inv: usize,
    pub ge_l2: f64,
    pub p_l2: Option<f64>,
    pub ge_max: f64,
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
    pub reference: Vec<ReferenceRow>,
}

const fn row(h_inv: usize, ge_l2: f64, p_l2: f64, ge_max: f64, p_max: f64) -> ReferenceRow {
    ReferenceRow {
        h_inv,
        ge_l2,
        p_l2: Some(p_l2),
        ge_max,
        p_max: Some(p_max),
    }
}

const fn first(h_inv: usize, ge_l2: f64, ge_max: f64) -> ReferenceRow {
    ReferenceRow {
        h_inv,
        ge_l2,
        p_l2: None,
        ge_max,
        p_max: None,
    }
}

struct Spec {
    name: &'static str,
    description: &'static str,
    problem: &'static str,
    c: Option<f64>,
    method: &'static str,
    correction: CorrectionKind,
    estimator: EstimatorKind,
    dt: DtConfig,
    reference: &'static [ReferenceRow],
}

const P1_HOMOGENEOUS: &[ReferenceRow] = &[
    first(4, 0.33e0, 0.52e0),
    row(8, 0.60e-1, 2.45, 0.11e0, 2.19),
    row(16, 0.97e-2, 2.64, 0.20e-1, 2.64),
    row(32, 0.14e-2, 2.74, 0.30e-2, 2.75),
    row(64, 0.20e-3, 2.84, 0.39e-3, 2.91),
    row(128, 0.27e-4, 2.90, 0.49e-4, 3.01),
];

const P1_UNCORRECTED: &[ReferenceRow] = &[
    first(4, 0.40e0, 0.96e0),
    row(8, 0.70e-1, 2.53, 0.17e0, 1.68),
    row(16, 0.12e-1, 2.55, 0.98e-1, 0.80),
    row(32, 0.22e-2, 2.41, 0.59e-1, 0.74),
    row(64, 0.48e-3, 2.23, 0.34e-1, 0.78),
    row(128, 0.11e-3, 2.11, 0.20e-1, 0.81),
];

const P1_EXTENSION_HV: &[ReferenceRow] = &[
    first(4, 0.31e0, 0.51e0),
    row(8, 0.58e-1, 2.42, 0.11e0, 2.17),
    row(16, 0.95e-2, 2.74, 0.20e-1, 2.74),
    row(32, 0.14e-2, 2.74, 0.29e-2, 2.74),
    row(64, 0.20e-3, 2.84, 0.39e-3, 2.91),
    row(128, 0.27e-4, 2.90, 0.48e-4, 3.01),
];

const P1_EXTENSION_38: &[ReferenceRow] = &[
    first(4, 0.44e-1, 0.66e-1),
    row(8, 0.44e-2, 3.32, 0.77e-2, 3.01),
    row(16, 0.58e-3, 2.93, 0.12e-2, 2.70),
    row(32, 0.79e-4, 2.88, 0.15e-3, 2.96),
    row(64, 0.84e-5, 3.23, 0.12e-4, 3.69),
    row(128, 0.79e-6, 3.41, 0.11e-5, 3.48),
];

const P2_SPATIAL: &[ReferenceRow] = &[
    first(8, 0.1372e-5, 0.3163e-5),
    row(16, 0.9562e-7, 3.84, 0.2102e-6, 3.91),
    row(32, 0.6311e-8, 3.92, 0.1401e-7, 3.91),
    row(64, 0.4066e-9, 3.96, 0.8920e-9, 3.97),
    row(128, 0.2585e-10, 3.98, 0.5616e-10, 3.99),
];

const P3_SPATIAL: &[ReferenceRow] = &[
    first(8, 0.1786e-5, 0.3382e-5),
    row(16, 0.1167e-6, 3.94, 0.2215e-6, 3.93),
    row(32, 0.7476e-8, 3.96, 0.1449e-7, 3.94),
    row(64, 0.4744e-9, 3.98, 0.9286e-9, 3.96),
    row(128, 0.2991e-10, 3.99, 0.5940e-10, 3.97),
];

const P2_HV: &[ReferenceRow] = &[
    first(8, 0.1001e-4, 0.2695e-4),
    row(16, 0.1184e-5, 3.08, 0.3326e-5, 3.02),
    row(32, 0.1383e-6, 3.10, 0.4067e-6, 3.03),
    row(64, 0.1715e-7, 3.01, 0.5105e-7, 2.99),
    row(128, 0.2258e-8, 2.93, 0.7404e-8, 2.79),
    row(256, 0.3048e-9, 2.89, 0.1074e-8, 2.79),
    row(512, 0.4108e-10, 2.89, 0.1528e-9, 2.81),
    row(1024, 0.5472e-11, 2.91, 0.2125e-10, 2.85),
];

const P2_38: &[ReferenceRow] = &[
    first(8, 0.29e-5, 0.54e-5),
    row(16, 0.27e-6, 3.41, 0.55e-6, 3.29),
    row(32, 0.22e-7, 3.61, 0.57e-7, 3.29),
    row(64, 0.18e-8, 3.61, 0.63e-8, 3.17),
    row(128, 0.16e-9, 3.47, 0.75e-9, 3.07),
    row(256, 0.16e-10, 3.34, 0.93e-10, 3.01),
    row(512, 0.17e-11, 3.28, 0.18e-10, 2.99),
    row(1024, 0.17e-12, 3.26, 0.15e-11, 2.98),
];

const P3_HV: &[ReferenceRow] = &[
    first(8, 0.29e-4, 0.88e-4),
    row(16, 0.30e-5, 3.24, 0.14e-4, 2.60),
    row(32, 0.34e-6, 3.17, 0.24e-5, 2.61),
    row(64, 0.45e-7, 2.89, 0.43e-6, 2.48),
    row(128, 0.65e-8, 2.80, 0.78e-7, 2.45),
];

const P3_38: &[ReferenceRow] = &[
    first(8, 0.60e-5, 0.12e-4),
    row(16, 0.49e-6, 3.60, 0.16e-5, 2.88),
    row(32, 0.30e-7, 4.05, 0.25e-6, 2.70),
    row(64, 0.22e-8, 3.74, 0.43e-7, 2.54),
    row(128, 0.24e-9, 3.22, 0.77e-8, 2.48),
];

const P3_FIXED_HV: &[ReferenceRow] = &[
    row(8, 0.2862e-4, 3.00, 0.8784e-4, 2.29),
    row(16, 0.3026e-5, 3.53, 0.1446e-4, 2.56),
    row(32, 0.3353e-6, 3.33, 0.2372e-5, 2.70),
    row(64, 0.4515e-7, 3.01, 0.4267e-6, 2.75),
    row(128, 0.6490e-8, 2.85, 0.7802e-7, 2.72),
    row(200, 0.1847e-8, 2.83, 0.2813e-7, 2.78),
    row(224, 0.1339e-8, 2.84, 0.2198e-7, 2.79),
];

const P3_FIXED_38: &[ReferenceRow] = &[
    row(8, 0.5953e-5, 2.58, 0.1188e-4, 2.33),
    row(16, 0.4910e-6, 3.24, 0.1615e-5, 2.69),
    row(32, 0.2970e-7, 3.92, 0.2488e-6, 2.28),
    row(64, 0.2219e-8, 3.46, 0.4291e-7, 2.35),
    row(128, 0.2386e-9, 3.14, 0.7707e-8, 2.62),
    row(200, 0.5960e-10, 3.13, 0.2561e-8, 2.86),
    row(224, 0.4183e-10, 3.14, 0.1936e-8, 2.93),
];

fn specs() -> Vec<Spec> {
    use CorrectionKind::*;
    use EstimatorKind::*;
    let s = |name, description, problem, c, method, correction, estimator, dt, reference| Spec {
        name,
        description,
        problem,
        c,
        method,
        correction,
        estimator,
        dt,
        reference,
    };
    vec![
        s("table1", "Problem 1, C=0, AMFW-HV, dt=h", "problem1", Some(0.0), "AMFW-HV", None, Simultaneous, DtConfig::EqualToH {}, P1_HOMOGENEOUS),
        s("table2", "Problem 1, C=1, AMFW-HV, uncorrected, dt=h", "problem1", Some(1.0), "AMFW-HV", None, Simultaneous, DtConfig::EqualToH {}, P1_UNCORRECTED),
        s("table3", "Problem 1, C=1, AMFW-HV, operator extension, dt=h", "problem1", Some(1.0), "AMFW-HV", Extension, Simultaneous, DtConfig::EqualToH {}, P1_EXTENSION_HV),
        s("table4", "Problem 2, spatial order, AMFW-3/8, dt=h^(5/3)", "problem2", Option::None, "AMFW-3/8", Extension, Spatial, DtConfig::KappaH53 { kappa: 1.0 }, P2_SPATIAL),
        s("table5", "Problem 3, spatial order, AMFW-3/8, dt=h^(5/3)/4", "problem3", Option::None, "AMFW-3/8", Extension, Spatial, DtConfig::KappaH53 { kappa: 0.25 }, P3_SPATIAL),
        s("table6", "Problem 2, AMFW-HV, dt=h", "problem2", Option::None, "AMFW-HV", Extension, Simultaneous, DtConfig::EqualToH {}, P2_HV),
        s("table7", "Problem 3, AMFW-HV, dt=h", "problem3", Option::None, "AMFW-HV", Extension, Simultaneous, DtConfig::EqualToH {}, P3_HV),
        s("table8", "Problem 2, AMFW-3/8, dt=h", "problem2", Option::None, "AMFW-3/8", Extension, Simultaneous, DtConfig::EqualToH {}, P2_38),
        s("table9", "Problem 3, AMFW-HV, fixed-h temporal order, dt=2h,h,h/2", "problem3", Option::None, "AMFW-HV", Extension, TemporalFixedH, DtConfig::EqualToH {}, P3_FIXED_HV),
        s("table10", "Problem 3, AMFW-3/8, fixed-h temporal order, dt=2h,h,h/2", "problem3", Option::None, "AMFW-3/8", Extension, TemporalFixedH, DtConfig::EqualToH {}, P3_FIXED_38),
        s("table11", "Problem 1, C=1, AMFW-3/8, operator extension, dt=h", "problem1", Some(1.0), "AMFW-3/8", Extension, Simultaneous, DtConfig::EqualToH {}, P1_EXTENSION_38),
        s("table12", "Problem 3, AMFW-3/8, dt=h", "problem3", Option::None, "AMFW-3/8", Extension, Simultaneous, DtConfig::EqualToH {}, P3_38),
    ]
}

/// All presets in registry order.
pub fn presets() -> Vec<Preset> {
    specs()
        .into_iter()
        .map(|s| Preset {
            name: s.name,
            description: s.description,
            config: ExperimentConfig {
                name: Some(s.name.into()),
                method: s.method.into(),
                correction: s.correction,
                estimator: s.estimator,
                norms: vec![crate::config::NormKind::L2, crate::config::NormKind::Max],
                output: None,
                threads: None,
                seed: 0,
                problem: ProblemConfig {
                    id: s.problem.into(),
                    c: s.c,
                },
                grid: GridConfig::from_h_inv(s.reference.iter().map(|r| r.h_inv).collect()),
                dt: s.dt,
            },
            reference: s.reference.to_vec(),
        })
        .collect()
}

pub fn preset(name: &str) -> Option<Preset> {
    let key = name.trim().to_ascii_lowercase();
    presets().into_iter().find(|p| p.name == key)
}

/// Text table of the registry.
pub fn list() -> String {
    let mut out = format!(
        "{:<8} {:<10} {:<9} {:<10} {:<17} {:<22} {}\n",
        "name", "problem", "method", "correction", "estimator", "dt rule", "description"
    );
    for p in presets() {
        let c = &p.config;
        let problem = match c.problem.c {
            Some(v) => format!("{}(C={v})", c.problem.id),
            None => c.problem.id.clone(),
        };
        out.push_str(&format!(
            "{:<8} {:<10} {:<9} {:<10} {:<17} {:<22} {}\n",
            p.name,
            problem.replace("problem", "p"),
            c.method,
            c.correction.core().name(),
            c.estimator.core().name(),
            c.dt.describe(),
            p.description
        ));
    }
    out
}
