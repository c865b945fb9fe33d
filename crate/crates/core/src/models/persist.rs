use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "culture-class-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T> {
    format: &'static str,
    version: u32,
    scalar: &'static str,
    model: &'a TrainedModel<T>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    scalar: String,
}

#[derive(Deserialize)]
struct OwnedEnvelope<T> {
    model: TrainedModel<T>,
}

/// Serialise a model to a versioned JSON container.
pub fn save_model<T: Scalar>(model: &TrainedModel<T>) -> Result<Vec<u8>> {
    serde_json::to_vec(&Envelope {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        scalar: T::type_name(),
        model,
    })
    .map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<TrainedModel<T>> {
    let header: Header = serde_json::from_slice(bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if header.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!("unknown format tag {:?}", header.format)));
    }
    if header.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "version {} is not supported (expected {MODEL_VERSION})",
            header.version
        )));
    }
    if header.scalar != T::type_name() {
        return Err(Error::ModelFormat(format!(
            "model stores {} parameters, requested {}",
            header.scalar,
            T::type_name()
        )));
    }
    let envelope: OwnedEnvelope<T> = serde_json::from_slice(bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(envelope.model)
}
