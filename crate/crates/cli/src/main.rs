use clap::Parser;

fn main() {
    let cli = blocksep_cli::Cli::parse();
    let code = blocksep_cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
