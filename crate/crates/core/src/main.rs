use floqlyap::cli;

fn main() {
    std::process::exit(cli::run());
}
