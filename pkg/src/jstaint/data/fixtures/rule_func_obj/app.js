const out = document.getElementById("out");
const widget = {
  update: function (text) {
    return text;
  }
};
widget.update(location.hash);
out.innerHTML = widget;
