use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::matrix::{Matrix, Metric};
use crate::reduce::{self, ReduceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub topic_id: usize,
    pub x: f64,
    pub y: f64,
    pub size: usize,
}

/// Result of laying out topics in the plane. `degenerate` is set for a
/// single topic, which is placed at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicMap {
    pub points: Vec<MapPoint>,
    pub degenerate: bool,
}

/// Projects topic vectors (c-TF-IDF rows or mean embeddings) to 2-D.
///
/// Three or more topics go through the reducer with `n_neighbors =
/// min(15, t - 1)` and cosine distance. Two topics are placed on the x-axis
/// at plus/minus half their cosine distance, since the neighbor graph needs
/// more points than neighbors.
pub fn topic_map_coordinates(vectors: &Matrix, sizes: &[usize], seed: u64) -> Result<TopicMap, TopicError> {
    let t = vectors.rows();
    if t != sizes.len() {
        return Err(TopicError::Misaligned { docs: t, labels: sizes.len() });
    }
    let coords: Vec<(f64, f64)> = match t {
        0 => return Err(TopicError::NoTopics),
        1 => {
            return Ok(TopicMap {
                points: alloc::vec![MapPoint { topic_id: 0, x: 0.0, y: 0.0, size: sizes[0] }],
                degenerate: true,
            })
        }
        2 => {
            let d = Metric::Cosine.distance(vectors.row(0), vectors.row(1));
            alloc::vec![(-d / 2.0, 0.0), (d / 2.0, 0.0)]
        }
        _ => {
            let config = ReduceConfig {
                n_neighbors: 15.min(t - 1).max(2),
                n_components: 2,
                metric: Metric::Cosine,
                seed,
                ..ReduceConfig::default()
            };
            let r = reduce::reduce(vectors, &config)?;
            r.embedding.iter_rows().map(|p| (p[0], p[1])).collect()
        }
    };
    Ok(TopicMap {
        points: coords
            .into_iter()
            .zip(sizes)
            .enumerate()
            .map(|(topic_id, ((x, y), &size))| MapPoint { topic_id, x, y, size })
            .collect(),
        degenerate: false,
    })
}
