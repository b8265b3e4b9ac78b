use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, EvalError, Result};
use crate::space::{Architecture, SearchSpace};

use super::Evaluator;

pub const TABULAR_HEADER: &str = "architecture,fitness";

/// Fitness lookup table keyed by canonical architecture string.
#[derive(Debug, Clone)]
pub struct TabularEvaluator {
    space: SearchSpace,
    table: HashMap<String, f64>,
}

impl TabularEvaluator {
    pub fn from_map(space: SearchSpace, table: HashMap<String, f64>) -> Self {
        Self { space, table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.table.get(key).copied()
    }
}

impl Evaluator for TabularEvaluator {
    fn evaluate(&self, arch: &Architecture) -> Result<f64, EvalError> {
        let key = self.space.encode(arch);
        self.table
            .get(&key)
            .copied()
            .ok_or(EvalError::MissingEntry(key))
    }
}

/// Load an `architecture,fitness` file. The architecture field itself holds
/// commas, so each row splits at its last comma.
pub fn load_tabular(path: impl AsRef<Path>, space: &SearchSpace) -> Result<TabularEvaluator> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::TabularLoad {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TABULAR_HEADER => {}
        Some((_, header)) => {
            return Err(err(
                1,
                format!("expected header `{TABULAR_HEADER}`, found `{header}`"),
            ))
        }
        None => return Err(err(1, "empty file".into())),
    }
    let mut table = HashMap::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (arch, fitness) = line
            .rsplit_once(',')
            .ok_or_else(|| err(lineno, "missing fitness column".into()))?;
        let arch = arch.trim().trim_matches('"');
        let decoded = space.decode(arch).map_err(|e| err(lineno, e.to_string()))?;
        let fitness: f64 = fitness
            .trim()
            .parse()
            .map_err(|e| err(lineno, format!("bad fitness `{}`: {e}", fitness.trim())))?;
        if !(0.0..=1.0).contains(&fitness) {
            return Err(err(lineno, format!("fitness {fitness} outside [0, 1]")));
        }
        if table.insert(space.encode(&decoded), fitness).is_some() {
            return Err(err(lineno, format!("duplicate architecture `{arch}`")));
        }
    }
    Ok(TabularEvaluator::from_map(space.clone(), table))
}

/// Write rows in the order given.
pub fn write_tabular<'a>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = (&'a str, f64)>,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{TABULAR_HEADER}")?;
    for (arch, fitness) in rows {
        writeln!(out, "{arch},{fitness}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn lookup() {
        let space = SearchSpace::default_space(2).unwrap();
        let f = write("architecture,fitness\ngat,sum,tanh,4,64;gcn,mean,elu,2,16,0.81\n");
        let eval = load_tabular(f.path(), &space).unwrap();
        let arch = space.decode("gat,sum,tanh,4,64;gcn,mean,elu,2,16").unwrap();
        assert_eq!(eval.evaluate(&arch), Ok(0.81));
        let other = space.decode("gcn,sum,tanh,4,64;gcn,mean,elu,2,16").unwrap();
        assert!(matches!(
            eval.evaluate(&other),
            Err(EvalError::MissingEntry(_))
        ));
    }

    #[test]
    fn out_of_range_is_a_load_error() {
        let space = SearchSpace::default_space(2).unwrap();
        let f = write("architecture,fitness\ngat,sum,tanh,4,64;gcn,mean,elu,2,16,0.5\ngat,sum,tanh,4,64;gcn,mean,elu,2,32,1.2\n");
        match load_tabular(f.path(), &space) {
            Err(Error::TabularLoad { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        let space = SearchSpace::default_space(1).unwrap();
        for bad in [
            "arch,fit\n",
            "architecture,fitness\ngat,sum,tanh,4,0.5\n",
            "architecture,fitness\ngat,sum,tanh,4,64,abc\n",
            "architecture,fitness\ngat,sum,tanh,4,64,0.1\ngat,sum,tanh,4,64,0.2\n",
        ] {
            assert!(load_tabular(write(bad).path(), &space).is_err(), "{bad}");
        }
    }
}
