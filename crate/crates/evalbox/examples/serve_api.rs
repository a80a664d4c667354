//! Run the HTTP service with the bundled fixtures loaded.
//!
//! ```bash
//! cargo run -p evalbox --example serve_api
//! # then, from another terminal:
//! curl -s localhost:8572/v1/health
//! curl -s localhost:8572/v1/problems?dataset=fixtures | head -c 300
//! curl -s -X POST localhost:8572/v1/run_code \
//!   -H 'content-type: application/json' \
//!   -d '{"language": "python", "code": "print(40 + 2)"}'
//! curl -s -X POST localhost:8572/v1/judge \
//!   -H 'content-type: application/json' \
//!   -d '{"problem_id": "py-ae-001", "completion": "```python\ndef add(a, b):\n    return a + b\n```"}'
//! ```

use std::path::Path;

use evalbox::ServiceConfig;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt().with_target(false).init();

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut config = ServiceConfig::default();
    config
        .datasets
        .insert("fixtures".to_string(), fixtures.join("problems.jsonl"));

    println!("listening on http://{} (ctrl-c to stop)", config.listen);
    evalbox::service::serve(config).await?;
    Ok(())
}
