// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

fn main() {
    let cli = appgnn::cli::Cli::parse();
    if let Err(e) = appgnn::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
