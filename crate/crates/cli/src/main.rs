use clap::Parser;

fn main() {
    let cli = gibbsent_cli::Cli::parse();
    std::process::exit(gibbsent_cli::main_with(&cli));
}
