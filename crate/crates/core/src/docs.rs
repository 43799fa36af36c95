//! JSON documents for images and maps.
//!
//! A document is canonical when its points are sorted, explicit edges are
//! sorted pairs `[i, j]` with `i < j`, and map pairs are sorted by domain
//! index. Canonical documents serialize to a single line of compact JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundle::HlpTest;
use crate::error::{Error, Result};
use crate::homotopy::HomotopyTrace;
use crate::lattice::{AdjacencySpec, DigitalImage, Point};
use crate::maps::DigitalMap;

/// Adjacency of an image document: `"c1"`, `"c2"`, ... or explicit edges
/// over the document's point indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdjacencyDoc {
    Named(String),
    Explicit { explicit: Vec<[usize; 2]> },
}

impl AdjacencyDoc {
    pub fn to_spec(&self) -> Result<AdjacencySpec> {
        match self {
            AdjacencyDoc::Named(name) => name
                .strip_prefix('c')
                .and_then(|l| l.parse::<u32>().ok())
                .filter(|&l| l >= 1)
                .map(AdjacencySpec::Cl)
                .ok_or_else(|| Error::Malformed(format!("unknown adjacency {name:?}"))),
            AdjacencyDoc::Explicit { explicit } => {
                Ok(AdjacencySpec::explicit(explicit.iter().map(|&[a, b]| (a, b))))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageDocument {
    pub dim: usize,
    pub points: Vec<Point>,
    pub adjacency: AdjacencyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl ImageDocument {
    /// The canonical document of `img`.
    pub fn from_image(img: &DigitalImage, name: Option<String>) -> Self {
        let adjacency = match img.spec() {
            AdjacencySpec::Cl(l) => AdjacencyDoc::Named(format!("c{l}")),
            AdjacencySpec::Explicit(_) => AdjacencyDoc::Explicit {
                explicit: img.edges().map(|(a, b)| [a, b]).collect(),
            },
        };
        ImageDocument {
            dim: img.dim(),
            points: img.points().to_vec(),
            adjacency,
            name,
        }
    }

    pub fn to_image(&self) -> Result<DigitalImage> {
        if let Some(p) = self.points.iter().find(|p| p.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: p.dim(),
            });
        }
        DigitalImage::new(self.points.clone(), self.adjacency.to_spec()?)
    }

    pub fn canonicalize(&self) -> Result<Self> {
        Ok(Self::from_image(&self.to_image()?, self.name.clone()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("image document: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    /// Compact JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

/// An image given inline or by a path relative to the map document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImageRef {
    File { file: PathBuf },
    Inline(ImageDocument),
}

impl ImageRef {
    pub fn resolve(&self, base_dir: &Path) -> Result<ImageDocument> {
        match self {
            ImageRef::Inline(doc) => Ok(doc.clone()),
            ImageRef::File { file } => ImageDocument::load(&base_dir.join(file)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub domain: ImageRef,
    pub codomain: ImageRef,
    /// `[domain index, codomain index]` over the documents' point order.
    pub pairs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MapDocument {
    /// The canonical document of `map`, with both images inline.
    pub fn from_map(map: &DigitalMap, name: Option<String>) -> Self {
        MapDocument {
            domain: ImageRef::Inline(ImageDocument::from_image(map.domain(), None)),
            codomain: ImageRef::Inline(ImageDocument::from_image(map.codomain(), None)),
            pairs: map.table().iter().enumerate().map(|(i, &j)| [i, j]).collect(),
            name,
        }
    }

    /// Build the map; file references are resolved against `base_dir`.
    pub fn to_map(&self, base_dir: &Path) -> Result<DigitalMap> {
        let dom_doc = self.domain.resolve(base_dir)?;
        let cod_doc = self.codomain.resolve(base_dir)?;
        let domain = Arc::new(dom_doc.to_image()?);
        let codomain = Arc::new(cod_doc.to_image()?);
        let mut table = vec![None; domain.len()];
        for &[a, b] in &self.pairs {
            let (Some(pa), Some(pb)) = (dom_doc.points.get(a), cod_doc.points.get(b)) else {
                return Err(Error::Malformed(format!("pair [{a}, {b}] is out of range")));
            };
            let i = domain.index_of(pa).expect("document points are in the image");
            let j = codomain.index_of(pb).expect("document points are in the image");
            match table[i] {
                Some(prev) if prev != j => {
                    return Err(Error::Malformed(format!("domain index {a} is mapped twice")));
                }
                _ => table[i] = Some(j),
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, j)| {
                j.ok_or_else(|| Error::PartialMap(format!("domain point {} has no image", domain.point(i))))
            })
            .collect::<Result<Vec<_>>>()?;
        DigitalMap::new(domain, codomain, table)
    }

    pub fn canonicalize(&self, base_dir: &Path) -> Result<Self> {
        Ok(Self::from_map(&self.to_map(base_dir)?, self.name.clone()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("map document: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

/// A homotopy-lifting test against a map `g: Y → Z`: `start` is a table
/// `source → Y` and `homotopy` a list of stage tables `source → Z`, over
/// the sorted point orders of the images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HlpTestDocument {
    pub source: ImageDocument,
    pub start: Vec<usize>,
    pub homotopy: Vec<Vec<usize>>,
}

impl HlpTestDocument {
    pub fn to_test(&self, g: &DigitalMap) -> Result<HlpTest> {
        let a = Arc::new(self.source.to_image()?);
        let start = DigitalMap::new(a.clone(), g.domain().clone(), self.start.clone())?;
        let homotopy = HomotopyTrace::new(a, g.codomain().clone(), self.homotopy.clone())?;
        Ok(HlpTest { start, homotopy })
    }

    /// Parse a JSON array of tests.
    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("test list: {e}")))
    }

    pub fn load_list(path: &Path) -> Result<Vec<Self>> {
        Self::parse_list(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))
}

/// Load an image document and build the image.
pub fn load_image(path: &Path) -> Result<DigitalImage> {
    ImageDocument::load(path)?.to_image()
}

/// Load a map document, resolving file references next to it.
pub fn load_map(path: &Path) -> Result<DigitalMap> {
    let dir = path.parent().unwrap_or(Path::new("."));
    MapDocument::load(path)?.to_map(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_documents_canonicalize() {
        let text = r#"{"dim":1,"points":[[2],[0],[1]],"adjacency":{"explicit":[[1,2],[2,0]]},"name":"p"}"#;
        let doc = ImageDocument::parse(text).unwrap();
        let canon = doc.canonicalize().unwrap();
        assert_eq!(
            canon.to_json(),
            "{\"dim\":1,\"points\":[[0],[1],[2]],\"adjacency\":{\"explicit\":[[0,1],[1,2]]},\"name\":\"p\"}\n"
        );
        let again = ImageDocument::parse(&canon.to_json()).unwrap();
        assert_eq!(again, canon);
        assert_eq!(again.canonicalize().unwrap().to_json(), canon.to_json());
    }

    #[test]
    fn named_adjacency() {
        let doc = ImageDocument::parse(r#"{"dim":2,"points":[[0,0],[1,1]],"adjacency":"c2"}"#).unwrap();
        assert_eq!(doc.to_image().unwrap().edge_count(), 1);
        let bad = ImageDocument::parse(r#"{"dim":2,"points":[[0,0]],"adjacency":"c9"}"#).unwrap();
        assert!(bad.to_image().is_err());
        let bad = ImageDocument::parse(r#"{"dim":2,"points":[[0,0]],"adjacency":"four"}"#).unwrap();
        assert!(matches!(bad.to_image(), Err(Error::Malformed(_))));
        assert!(ImageDocument::parse(r#"{"dim":1,"points":[[0]],"adjacency":"c1","x":1}"#).is_err());
        let wrong_dim = ImageDocument::parse(r#"{"dim":1,"points":[[0,0]],"adjacency":"c1"}"#).unwrap();
        assert!(matches!(wrong_dim.to_image(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn map_documents_rewrite_indices() {
        let text = r#"{"domain":{"dim":1,"points":[[3],[2],[1],[0]],"adjacency":"c1"},
            "codomain":{"dim":1,"points":[[1],[0]],"adjacency":"c1"},
            "pairs":[[0,0],[1,0],[2,1],[3,1]]}"#;
        let doc = MapDocument::parse(text).unwrap();
        let map = doc.to_map(Path::new(".")).unwrap();
        assert_eq!(map.table(), &[0, 0, 1, 1]);
        let canon = doc.canonicalize(Path::new(".")).unwrap();
        assert_eq!(canon.pairs, vec![[0, 0], [1, 0], [2, 1], [3, 1]]);
        assert_eq!(MapDocument::parse(&canon.to_json()).unwrap(), canon);
    }

    #[test]
    fn map_documents_must_be_total_and_functional() {
        let img = r#"{"dim":1,"points":[[0],[1]],"adjacency":"c1"}"#;
        let partial = format!(r#"{{"domain":{img},"codomain":{img},"pairs":[[0,0]]}}"#);
        let err = MapDocument::parse(&partial).unwrap().to_map(Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::PartialMap(_)));
        let twice = format!(r#"{{"domain":{img},"codomain":{img},"pairs":[[0,0],[0,1],[1,1]]}}"#);
        assert!(MapDocument::parse(&twice).unwrap().to_map(Path::new(".")).is_err());
        let range = format!(r#"{{"domain":{img},"codomain":{img},"pairs":[[0,0],[1,5]]}}"#);
        assert!(MapDocument::parse(&range).unwrap().to_map(Path::new(".")).is_err());
    }
}
