use clap::Parser;
use feast::cli::{run_driver, DriverFlags};

fn main() {
    let flags = DriverFlags::parse();
    let code = run_driver(&flags, std::io::stdout(), std::io::stderr());
    std::process::exit(code);
}
