//! Classification objectives and the dataset layer behind them.

mod dataset;
mod objective;

pub use dataset::{
    binarize_mnist, load_libsvm, load_libsvm_raw, normalize_rows, parse_libsvm, split_train_test,
    Dataset, LabelRule, RawLibsvm, SparseRow, SyntheticSpec,
};
pub use objective::{test_accuracy, Loss, Objective, Quadratic, SmoothFn};
