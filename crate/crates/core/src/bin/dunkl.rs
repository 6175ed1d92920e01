fn main() {
    std::process::exit(dihedral_dunkl::cli::main());
}
