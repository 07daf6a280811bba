//! What the HTTP backend sends. With LECTERN_ENDPOINT set (and optionally
//! LECTERN_API_KEY and LECTERN_MODEL) the request is also sent.

use std::sync::Arc;

use lectern::gateway::{Gateway, HttpBackend, HttpBackendConfig, ImageRef, ModelRequest, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = HttpBackendConfig {
        endpoint: std::env::var("LECTERN_ENDPOINT").unwrap_or_else(|_| "http://127.0.0.1:8000/v1/chat/completions".into()),
        api_key: std::env::var("LECTERN_API_KEY").ok(),
        model: std::env::var("LECTERN_MODEL").unwrap_or_else(|_| "any-vision-model".into()),
        timeout_secs: 60,
    };
    let backend = HttpBackend::new(config)?;

    // a 1x1 png stands in for a slide image
    let png = vec![0x89, b'P', b'N', b'G'];
    let request = ModelRequest::new(Profile::Planner, "Describe the slide in two sentences.")
        .user_with_images("Slide text: Linear regression", vec![ImageRef::png(png)])
        .purpose("describe");
    let mut body = backend.wire_body(&request);
    body["messages"][1]["content"][1]["image_url"]["url"] = "data:image/png;base64,...".into();
    println!("{}", serde_json::to_string_pretty(&body)?);

    if std::env::var_os("LECTERN_ENDPOINT").is_some() {
        let gateway = Gateway::new(Arc::new(backend));
        let reply = gateway.complete(&request)?;
        println!("\n{:?}: {}", reply.finish_reason, reply.text);
    }
    Ok(())
}
