import init, { classify_orbit, certify_tree, oracle_level2 } from "./pkg/arboreal_wasm.js";

const field = (id) => document.getElementById(id).value.trim();
const out = document.getElementById("out");

function show(run) {
  out.classList.remove("error");
  try {
    out.textContent = run();
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e);
  }
}

await init();

document.getElementById("classify").onclick = () =>
  show(() => classify_orbit(Number(field("q")), field("c"), field("beta")));
document.getElementById("certify").onclick = () =>
  show(() => certify_tree(Number(field("q")), field("c"), field("beta"), Number(field("levels"))));
document.getElementById("oracle").onclick = () =>
  show(() => oracle_level2(field("c"), field("beta")));
