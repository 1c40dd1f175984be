use serde_json::Value;

use super::{Model, ModelError};

pub const MODEL_SCHEMA_VERSION: u64 = 1;

/// `{"version": 1, "model": {...}}`, pretty-printed.
pub fn serialize_model(model: &Model) -> String {
    let doc = serde_json::json!({
        "version": MODEL_SCHEMA_VERSION,
        "model": model,
    });
    serde_json::to_string_pretty(&doc).expect("models serialize")
}

pub fn deserialize_model(text: &str) -> Result<Model, ModelError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| ModelError::SchemaViolation(e.to_string()))?;
    let version = doc
        .get("version")
        .ok_or_else(|| ModelError::SchemaViolation("missing version field".into()))?;
    if version.as_u64() != Some(MODEL_SCHEMA_VERSION) {
        return Err(ModelError::SchemaViolation(format!(
            "version {version}, expected {MODEL_SCHEMA_VERSION}"
        )));
    }
    let model = doc
        .get("model")
        .ok_or_else(|| ModelError::SchemaViolation("missing model field".into()))?;
    serde_json::from_value(model.clone()).map_err(|e| ModelError::SchemaViolation(e.to_string()))
}
