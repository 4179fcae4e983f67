const out = document.getElementById("out");
const query = location.search;
const shown = query.toDisplayString();
out.innerHTML = shown;
