use clap::Parser;

fn main() {
    let cli = qinterf::app::Cli::parse();
    std::process::exit(qinterf::app::execute(&cli));
}
