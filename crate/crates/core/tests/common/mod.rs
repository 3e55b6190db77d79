#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textreuse::api::{self, AppState};
use textreuse::{DocMetadata, Document};

pub fn meta(id: &str, year: i32, author: &str, title: &str) -> DocMetadata {
    DocMetadata {
        doc_id: id.into(),
        year,
        author: author.into(),
        title: title.into(),
        collection: "test".into(),
    }
}

/// Lowercase letters and spaces; unrelated across seeds.
pub fn random_text(seed: u64, len: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = Uniform::from(0..27u8);
    (0..len)
        .map(|_| match rng.sample(letters) {
            26 => ' ',
            b => (b'a' + b) as char,
        })
        .collect()
}

pub fn doc(id: &str, year: i32, author: &str, len: usize, seed: u64) -> Document {
    Document::new(meta(id, year, author, &format!("Title of {id}")), random_text(seed, len)).unwrap()
}

/// Serves the router on an ephemeral port; returns the base URL.
pub async fn spawn(state: Arc<AppState>) -> String {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0)))
        .await
        .unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, api::router(state)).await.unwrap();
    });
    format!("http://{addr}")
}
