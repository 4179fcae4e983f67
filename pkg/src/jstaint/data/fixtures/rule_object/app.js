const out = document.getElementById("out");
const view = {};
view.title = location.hash;
out.innerHTML = view;
