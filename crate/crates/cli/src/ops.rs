//! Library operation -> one invocation that reaches it.

pub const OPS: &[(&str, &[&str])] = &[
    ("determinant", &["lattice", "det", "D4"]),
    ("signature", &["lattice", "sig", "U"]),
    ("smith_normal_form", &["lattice", "snf", "2,4,4;-6,6,12;10,-4,-16"]),
    ("discriminant_form", &["lattice", "disc", "A2"]),
    ("direct_sum", &["lattice", "sum", "U", "<44>"]),
    ("rescale", &["lattice", "rescale", "U", "--k", "2"]),
    ("parse_symbol", &["genus", "parse", "2_II^-2 3^+2"]),
    ("print_symbol", &["genus", "print", "4_3^-1 11^+1"]),
    ("symbol_from_gram", &["genus", "from-gram", "<44>"]),
    ("negate", &["genus", "negate", "3^-1 7^-1"]),
    ("p_excess", &["genus", "excess", "3^-2", "--p", "3"]),
    ("oddity", &["genus", "excess", "4_3^-1 11^+1", "--p", "2"]),
    ("exists", &["genus", "exists", "2_II^-2", "--signature", "0,4"]),
    ("canonicalize_2adic", &["genus", "canon", "2_7^+1 4_3^+1"]),
    ("p_length", &["genus", "parse", "2_7^+1 3^+2 9^-1"]),
    ("from_genus", &["disc", "iso", "2_II^-2", "D4"]),
    ("glue", &["disc", "glue", "2_7^+1 3^+2 9^-1", "3^+2", "--p", "3"]),
    ("enumerate_gluings", &["disc", "glue", "<6>", "<-6>", "--p", "3"]),
    ("embeddings", &["disc", "embed", "2_II^+2", "2_II^+4"]),
    ("orthogonal_complement", &["disc", "embed", "2_II^-2", "2_II^+4"]),
    ("witt_complement", &["disc", "witt", "2_II^+4", "2_II^-2"]),
    ("isometric", &["disc", "iso", "3^-1", "3^+1", "--anti"]),
    ("length_criterion", &["criteria", "length", "201"]),
    ("constituent_criterion", &["criteria", "constituent", "197", "--p", "2"]),
    ("determinant_condition", &["criteria", "det", "186", "--p", "3", "--q", "2"]),
    ("tame_conditions", &["criteria", "tame", "118", "--p", "11"]),
    ("legendre_orbit_condition", &["criteria", "legendre", "--orbits", "1,1,1,21", "--p", "5"]),
    ("rank3_glue_search", &["criteria", "glue", "165"]),
    ("rank3_char2_workflow", &["criteria", "char2", "171"]),
    ("wild_rank4_reasons", &["criteria", "wild", "112", "--p", "2"]),
    ("classify_entry", &["classify", "entry", "165", "--p", "11"]),
    ("reproduce_table", &["classify", "table", "6"]),
    ("mukai_holds", &["mukai", "holds", "311"]),
    ("mukai_residues", &["mukai", "residues"]),
    ("load_entries", &["data", "load", "../core/data/entries.tsv"]),
    ("validate_entries", &["data", "validate"]),
    ("run", &["ops"]),
];
