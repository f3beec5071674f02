//! Shared fixtures for the criterion benchmarks.

use framepick_core::{
    make_prototypes, ClassifierSpec, GeneratorConfig, InputProjection, KernelConfig, SamplerModel,
    SyntheticVideo,
};

pub struct Fixture {
    pub config: GeneratorConfig,
    pub additive: ClassifierSpec,
    pub penalized: ClassifierSpec,
    pub videos: Vec<SyntheticVideo>,
    pub model: SamplerModel,
    pub projection: InputProjection,
}

/// One deterministic setup shared by every benchmark group.
pub fn fixture() -> Fixture {
    let config = GeneratorConfig::default();
    let prototypes = make_prototypes(
        config.feature_dim,
        config.num_classes,
        config.prototype_seed,
    )
    .unwrap();
    let additive = ClassifierSpec::additive(prototypes.clone(), 1.0).unwrap();
    let penalized =
        ClassifierSpec::redundancy_penalized(prototypes, 0.5, 1.0, KernelConfig::scalar(1.4))
            .unwrap();
    let videos = framepick_core::generate_corpus(&config, 16, 99).unwrap();
    let projection = InputProjection::default_for(config.feature_dim, 22).unwrap();
    let model = SamplerModel::new(projection.output_dim(), 64, config.num_classes, 7).unwrap();
    Fixture {
        config,
        additive,
        penalized,
        videos,
        model,
        projection,
    }
}
