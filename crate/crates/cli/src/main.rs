use clap::Parser;

fn main() {
    let args = msnet_cli::Args::parse();
    std::process::exit(msnet_cli::run(&args));
}
