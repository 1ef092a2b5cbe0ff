use nhse::solver::count_solutions_small;

pub fn run() -> nhse::Result<()> {
    for sites in 2..=5 {
        let c = count_solutions_small(sites, 1.0, 1.0)?;
        let complex = c.roots.iter().filter(|r| r.omega_im != 0.0).count();
        println!("{sites} sites: {} solutions {:?}, {complex} with complex omega", c.total, c.by_support);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nhse::Result<()> {
    run()
}
