pub mod field;
pub mod metric;
pub mod star;
pub mod surface;

pub use field::{
    jacobian_self_test, AmbientField, AmbientPair, CombinedField, LinearField, PerturbationField,
    RadialExtension,
};
pub use metric::{metric_expansions, MetricExpansion};
pub use star::{exact_surface_area, exact_volume, StarDomain};
pub use surface::{
    project_zero_mean, second_order_volume_correction, surface_second_variation,
    surface_second_variation_from_metric, surface_second_variation_general,
    volume_second_order_defect,
};
