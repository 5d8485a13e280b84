use clap::Parser;

fn main() {
    let cli = urnlab_cli::Cli::parse();
    std::process::exit(urnlab_cli::run(&cli));
}
