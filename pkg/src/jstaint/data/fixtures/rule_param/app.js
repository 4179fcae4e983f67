const out = document.getElementById("out");
const raw = location.hash;
const shown = formatTitle(raw);
out.innerHTML = shown;
