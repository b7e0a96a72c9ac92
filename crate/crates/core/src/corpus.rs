//! The bundled subject programs and small worked-example fixtures.

use crate::lang::{parse_program, BinOp};
use crate::mutagen::{discover_mutation_points, MutationPoint};
use crate::strategies::Subject;

#[derive(Clone, Copy, Debug)]
pub struct CorpusProgram {
    pub name: &'static str,
    pub source: &'static str,
    /// Mutant count of the original subject this program was ported from.
    pub reference_mutants: usize,
}

pub const CORPUS: [CorpusProgram; 5] = [
    CorpusProgram { name: "caesar_cypher", source: include_str!("../../../corpus/caesar_cypher.ml0"), reference_mutants: 55 },
    CorpusProgram { name: "entropy", source: include_str!("../../../corpus/entropy.ml0"), reference_mutants: 46 },
    CorpusProgram { name: "euler", source: include_str!("../../../corpus/euler.ml0"), reference_mutants: 35 },
    CorpusProgram { name: "newton", source: include_str!("../../../corpus/newton.ml0"), reference_mutants: 39 },
    CorpusProgram { name: "prime", source: include_str!("../../../corpus/prime.ml0"), reference_mutants: 58 },
];

impl CorpusProgram {
    pub fn subject(&self) -> Subject {
        Subject::parse(self.name, self.source).expect("bundled program parses")
    }
}

pub fn find(name: &str) -> Option<&'static CorpusProgram> {
    CORPUS.iter().find(|p| p.name == name)
}

pub fn subjects() -> Vec<Subject> {
    CORPUS.iter().map(CorpusProgram::subject).collect()
}

pub const PARTITIONED_PROCESS: &str = include_str!("../../../corpus/fixtures/partitioned_process.ml0");
pub const TP1: &str = include_str!("../../../corpus/fixtures/tp1.ml0");

/// `partitioned_process` with four hand-picked mutants:
/// M1 `a + 1` to `<<`, M2 and M3 `a / 2` to `+` and `*`, M4 `i < 0` to `<=`.
pub fn partitioned_process_curated() -> Subject {
    let ast = parse_program(PARTITIONED_PROCESS).expect("fixture parses");
    let picks: [(BinOp, &str, &[BinOp]); 3] = [
        (BinOp::Add, "partitioned_process", &[BinOp::Shl]),
        (BinOp::Div, "partitioned_process", &[BinOp::Add, BinOp::Mul]),
        (BinOp::Lt, "process", &[BinOp::Le]),
    ];
    let all = discover_mutation_points(&ast);
    let points: Vec<MutationPoint> = picks
        .iter()
        .enumerate()
        .map(|(id, (op, func, repl))| {
            let p = all.iter().find(|p| p.original == *op && p.function == *func).expect("fixture point");
            MutationPoint { id, replacements: repl.to_vec(), ..p.clone() }
        })
        .collect();
    Subject::with_points("partitioned_process", ast, &points)
}
