import init, { traces, check, lts } from "./pkg/ccsp_web.js";

const term = document.getElementById("term");
const out = document.getElementById("out");

function show(op) {
  try {
    out.textContent = op(term.value) || "(empty)";
    out.className = "";
  } catch (err) {
    out.textContent = String(err);
    out.className = "error";
  }
}

await init();
out.textContent = "ready";

document.getElementById("traces").onclick = () => show(traces);
document.getElementById("check").onclick = () => show(check);
document.getElementById("lts").onclick = () => show(lts);
document.getElementById("examples").onchange = (e) => {
  if (e.target.value) {
    term.value = e.target.value;
    show(traces);
  }
};
