import init, { describeAirplane, inferAirplane, describeOrange, pruneOrange, fuse } from "./pkg/symbolact_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(3);

function slider(parent, text, value, onInput, cls) {
  const label = document.createElement("label");
  if (cls) label.className = cls;
  const name = document.createElement("span");
  name.textContent = text;
  const input = Object.assign(document.createElement("input"), { type: "range", min: 0, max: 1, step: 0.01, value });
  const out = document.createElement("output");
  out.textContent = fmt(value);
  input.addEventListener("input", () => { out.textContent = fmt(+input.value); onInput(); });
  label.append(name, input, out);
  parent.append(label);
  return input;
}

function rows(tbody, items, cells) {
  tbody.replaceChildren(...items.map((item) => {
    const tr = document.createElement("tr");
    const [values, cls] = cells(item);
    if (cls) tr.className = cls;
    for (const v of values) tr.append(Object.assign(document.createElement("td"), { textContent: v }));
    return tr;
  }));
}

function airplane() {
  const system = JSON.parse(describeAirplane());
  $("air-conclusion").textContent = system.conclusion;
  const inputs = new Map();
  const update = () => {
    const values = Object.fromEntries([...inputs].map(([t, i]) => [t, +i.value]));
    const out = JSON.parse(inferAirplane(JSON.stringify(values)));
    $("air-score").textContent = fmt(out.score);
    rows($("air-rules").tBodies[0], out.rules, (r) => [[r.rule, fmt(r.minimum), r.weakest], r.rule === out.winning_rule ? "win" : ""]);
  };
  for (const text of system.premises) inputs.set(text, slider($("air-sliders"), text, 0.5, update));
  update();
}

function orange() {
  const tree = JSON.parse(describeOrange());
  const theta = $("theta");
  theta.value = tree.theta;
  const fathers = new Map();
  const update = () => {
    $("theta-out").textContent = fmt(+theta.value);
    const values = Object.fromEntries([...fathers].map(([t, i]) => [t, +i.value]));
    try {
      const out = JSON.parse(pruneOrange(+theta.value, JSON.stringify(values)));
      $("orange-calls").textContent = `${out.pruned_calls} pruned vs ${out.naive_calls} naive`;
      $("orange-exact").textContent = fmt(out.exact);
      $("orange-pruned").textContent = fmt(out.pruned);
      rows($("orange-table").tBodies[0], out.symbols, (s) => [[s.text, fmt(s.exact), fmt(s.pruned), s.source], s.source === "pruned" ? "pruned" : ""]);
    } catch (e) {
      $("orange-calls").textContent = e.message;
    }
  };
  theta.addEventListener("input", update);
  for (const f of tree.fathers) fathers.set(f.text, slider($("orange-sliders"), f.text, f.value, update, "father"));
  update();
}

function fusion() {
  const update = () => {
    const policy = document.querySelector("input[name=policy]:checked").value;
    try {
      const out = JSON.parse(fuse($("sys1").value, $("sys2").value, policy, +$("alpha1").value, +$("alpha2").value));
      $("fused").className = "";
      $("fused").textContent = out.ranking.map((k, i) => `${i + 1}. ${k}  ${fmt(out.fused[k])}`).join("\n");
    } catch (e) {
      $("fused").className = "error";
      $("fused").textContent = e.message;
    }
  };
  for (const el of document.querySelectorAll("#sys1, #sys2, #alpha1, #alpha2, input[name=policy]")) el.addEventListener("input", update);
  update();
}

await init();
airplane();
orange();
fusion();
