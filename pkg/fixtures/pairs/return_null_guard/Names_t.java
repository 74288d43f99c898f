public class Names {
    public String initials(String name) {
        if (name == null) {
            return null;
        }
        String[] parts = name.split(" ");
        StringBuilder out = new StringBuilder();
        for (String p : parts) {
            out.append(p.charAt(0));
        }
        return out.toString();
    }
}
