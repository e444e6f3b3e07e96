use clap::Parser;

fn main() {
    let cli = certbound_cli::Cli::parse();
    std::process::exit(certbound_cli::main_with(cli));
}
