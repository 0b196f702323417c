use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::BoundingBox;

/// One annotated image: the file and the inclusive box around its salient
/// object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub image_path: PathBuf,
    pub bbox: BoundingBox,
}

fn parse_coord(field: &str, context: &str, name: &str) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| {
        Error::parse(
            context,
            format!("{name} `{}` is not a non-negative integer", field.trim()),
        )
    })
}

/// Parses `image_path,x_min,y_min,x_max,y_max` lines. A first line whose
/// coordinate columns are not all integers is treated as a header. Blank
/// lines are ignored. Relative paths are joined onto `base_dir` when given.
pub fn parse_ground_truth_csv(
    text: &str,
    source: &str,
    base_dir: Option<&Path>,
) -> Result<Vec<GroundTruthRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::parse(source, e.to_string()))?;
        let line = row.position().map_or(n as u64 + 1, |p| p.line());
        let context = format!("{source} line {line}");
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 5 {
            return Err(Error::parse(
                &context,
                format!(
                    "expected 5 fields (image_path,x_min,y_min,x_max,y_max), found {}",
                    row.len()
                ),
            ));
        }
        if n == 0 && (1..5).any(|i| row[i].parse::<usize>().is_err()) {
            continue;
        }
        let names = ["x_min", "y_min", "x_max", "y_max"];
        let mut c = [0usize; 4];
        for (i, name) in names.iter().enumerate() {
            c[i] = parse_coord(&row[i + 1], &context, name)?;
        }
        let bbox = BoundingBox::new(c[0], c[1], c[2], c[3])
            .map_err(|e| Error::parse(&context, e.to_string()))?;
        if row[0].is_empty() {
            return Err(Error::parse(&context, "empty image path"));
        }
        let path = PathBuf::from(&row[0]);
        let image_path = match base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path,
        };
        records.push(GroundTruthRecord { image_path, bbox });
    }
    Ok(records)
}

/// Serializes records in the native CSV format, with a header.
pub fn write_ground_truth_csv(records: &[GroundTruthRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::InvalidValue(e.to_string());
    w.write_record(["image_path", "x_min", "y_min", "x_max", "y_max"])
        .map_err(io_err)?;
    for r in records {
        let b = &r.bbox;
        w.write_record([
            r.image_path.to_string_lossy().into_owned(),
            b.x_min.to_string(),
            b.y_min.to_string(),
            b.x_max.to_string(),
            b.y_max.to_string(),
        ])
        .map_err(io_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidValue(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

/// The single object of a VOC annotation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocObject {
    pub filename: String,
    pub name: Option<String>,
    /// Zero-based inclusive box (VOC coordinates are one-based).
    pub bbox: BoundingBox,
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(tag))
}

fn child_text<'a>(node: roxmltree::Node<'a, '_>, tag: &str) -> Option<&'a str> {
    child(node, tag).and_then(|c| c.text()).map(str::trim)
}

/// Parses one VOC annotation. Returns `None` unless the file has exactly
/// one `object` element.
pub fn parse_voc_annotation(xml: &str, source: &str) -> Result<Option<VocObject>> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::parse(source, e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        return Err(Error::parse(
            source,
            format!(
                "root element is `{}`, expected `annotation`",
                root.tag_name().name()
            ),
        ));
    }
    let objects: Vec<_> = root
        .children()
        .filter(|c| c.has_tag_name("object"))
        .collect();
    if objects.len() != 1 {
        return Ok(None);
    }
    let filename = child_text(root, "filename")
        .filter(|f| !f.is_empty())
        .ok_or_else(|| Error::parse(source, "missing <filename>"))?
        .to_string();
    let object = objects[0];
    let bndbox =
        child(object, "bndbox").ok_or_else(|| Error::parse(source, "object has no <bndbox>"))?;
    let mut c = [0usize; 4];
    for (i, tag) in ["xmin", "ymin", "xmax", "ymax"].iter().enumerate() {
        let text = child_text(bndbox, tag)
            .ok_or_else(|| Error::parse(source, format!("missing <{tag}>")))?;
        let v: f64 = text
            .parse()
            .map_err(|_| Error::parse(source, format!("<{tag}> `{text}` is not a number")))?;
        if !(v.is_finite() && v >= 0.0 && v <= (u32::MAX as f64)) {
            return Err(Error::parse(
                source,
                format!("<{tag}> `{text}` out of range"),
            ));
        }
        c[i] = (v.round() as usize).saturating_sub(1);
    }
    let bbox = BoundingBox::new(c[0], c[1], c[2], c[3])
        .map_err(|e| Error::parse(source, e.to_string()))?;
    Ok(Some(VocObject {
        filename,
        name: child_text(object, "name").map(str::to_string),
        bbox,
    }))
}

/// Image directory for a VOC annotation directory: the sibling
/// `JPEGImages` when the directory is called `Annotations`, otherwise the
/// directory itself.
fn voc_image_dir(annotations: &Path) -> PathBuf {
    match (annotations.file_name(), annotations.parent()) {
        (Some(name), Some(parent)) if name == "Annotations" => parent.join("JPEGImages"),
        _ => annotations.to_path_buf(),
    }
}

/// Loads ground truth from a CSV file or a directory of VOC XML files.
/// Multi-object annotations are skipped with a warning.
pub fn ingest_ground_truth(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(path, e)))
            .collect::<Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml")));
        files.sort();
        let images = voc_image_dir(path);
        let mut records = Vec::new();
        for file in files {
            let xml = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let source = file.display().to_string();
            match parse_voc_annotation(&xml, &source)? {
                Some(obj) => records.push(GroundTruthRecord {
                    image_path: images.join(obj.filename),
                    bbox: obj.bbox,
                }),
                None => log::warn!("{source}: skipped, not exactly one object"),
            }
        }
        Ok(records)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_ground_truth_csv(&text, &path.display().to_string(), path.parent())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x0: usize, y0: usize, x1: usize, y1: usize) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn csv_with_and_without_header() {
        let r = parse_ground_truth_csv("img/bird.jpg,10,20,110,90\n", "gt", None).unwrap();
        assert_eq!(
            r,
            vec![GroundTruthRecord {
                image_path: "img/bird.jpg".into(),
                bbox: bb(10, 20, 110, 90)
            }]
        );
        let text = "image_path,x_min,y_min,x_max,y_max\na.png, 1, 2, 3, 4\n\nb.png,0,0,0,0\n";
        let r = parse_ground_truth_csv(text, "gt", Some(Path::new("/data"))).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].image_path, PathBuf::from("/data/a.png"));
        assert_eq!(r[1].bbox, bb(0, 0, 0, 0));
        assert!(parse_ground_truth_csv("", "gt", None).unwrap().is_empty());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err =
            parse_ground_truth_csv("a.png,1,2,3,4\nb.png,1,x,3,4\n", "gt.csv", None).unwrap_err();
        match err {
            Error::Parse { context, .. } => assert_eq!(context, "gt.csv line 2"),
            other => panic!("{other:?}"),
        }
        assert!(parse_ground_truth_csv("a.png,1,2,3\n", "gt", None).is_err());
        assert!(parse_ground_truth_csv("a.png,5,2,3,4\n", "gt", None).is_err());
        assert!(parse_ground_truth_csv("a.png,1,2,3,4\nb.png,-1,2,3,4\n", "gt", None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            GroundTruthRecord {
                image_path: "x, y.png".into(),
                bbox: bb(1, 2, 3, 4),
            },
            GroundTruthRecord {
                image_path: "z.jpg".into(),
                bbox: bb(0, 0, 9, 9),
            },
        ];
        let text = write_ground_truth_csv(&records).unwrap();
        assert_eq!(parse_ground_truth_csv(&text, "gt", None).unwrap(), records);
    }

    const VOC_ONE: &str = r#"<annotation>
        <folder>VOC2007</folder>
        <filename>000032.jpg</filename>
        <size><width>500</width><height>281</height><depth>3</depth></size>
        <object>
            <name>aeroplane</name>
            <bndbox><xmin>104</xmin><ymin>78</ymin><xmax>375</xmax><ymax>183</ymax></bndbox>
        </object>
    </annotation>"#;

    #[test]
    fn voc_single_object() {
        let obj = parse_voc_annotation(VOC_ONE, "a.xml").unwrap().unwrap();
        assert_eq!(obj.filename, "000032.jpg");
        assert_eq!(obj.name.as_deref(), Some("aeroplane"));
        assert_eq!(obj.bbox, bb(103, 77, 374, 182));
    }

    #[test]
    fn voc_multi_object_skipped_and_malformed_rejected() {
        let two = VOC_ONE.replace("</object>", "</object><object><name>x</name></object>");
        assert_eq!(parse_voc_annotation(&two, "a.xml").unwrap(), None);
        assert!(parse_voc_annotation("<annotation><object/>", "a.xml").is_err());
        let no_box = VOC_ONE
            .replace("<bndbox>", "<bbox>")
            .replace("</bndbox>", "</bbox>");
        assert!(parse_voc_annotation(&no_box, "a.xml").is_err());
        assert!(parse_voc_annotation("<other/>", "a.xml").is_err());
    }

    #[test]
    fn ingest_voc_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let ann = tmp.path().join("Annotations");
        std::fs::create_dir(&ann).unwrap();
        std::fs::write(ann.join("b.xml"), VOC_ONE).unwrap();
        std::fs::write(
            ann.join("a.xml"),
            VOC_ONE.replace("</object>", "</object><object/>"),
        )
        .unwrap();
        std::fs::write(ann.join("notes.txt"), "ignored").unwrap();
        let records = ingest_ground_truth(&ann).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(
            records[0].image_path,
            tmp.path().join("JPEGImages/000032.jpg")
        );

        let csv = tmp.path().join("gt.csv");
        std::fs::write(&csv, "p.png,1,1,2,2\n").unwrap();
        assert_eq!(
            ingest_ground_truth(&csv).unwrap()[0].image_path,
            tmp.path().join("p.png")
        );
    }
}
