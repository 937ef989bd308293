fn main() {
    println!("lpres");
}
