use clap::Parser;

fn main() {
    let args = unilin::cli::Args::parse();
    std::process::exit(unilin::cli::run(args));
}
